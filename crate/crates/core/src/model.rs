//! Timed-automaton network IR.
//!
//! An automaton is `(L, l0, Σ, C, I, T)` with Σ realized as the optional
//! synchronization label on each transition. Clocks are local to their
//! automaton, channels are global to the network.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::diagnostics::{Code, Diagnostic, Span};
pub use crate::frontend::ast::Relation;

/// Clock name. Ordered naturally (`c2` < `c10`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClockId(pub String);

impl ClockId {
    pub fn new(name: impl Into<String>) -> Self {
        ClockId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn split(&self) -> (&str, Option<u64>) {
        let digits = self.0.len() - self.0.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (prefix, num) = self.0.split_at(self.0.len() - digits);
        (prefix, num.parse().ok())
    }
}

impl Ord for ClockId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.split()
            .cmp(&other.split())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ClockId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ClockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClockAtom {
    pub clock: ClockId,
    pub relation: Relation,
    pub bound: u32,
}

impl fmt::Display for ClockAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.clock, self.relation.symbol(), self.bound)
    }
}

/// Conjunction of clock atoms. The empty conjunction is `true`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ClockConstraint {
    pub atoms: Vec<ClockAtom>,
}

impl ClockConstraint {
    pub fn new(atoms: Vec<ClockAtom>) -> Self {
        ClockConstraint { atoms }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn clocks(&self) -> impl Iterator<Item = &ClockId> {
        self.atoms.iter().map(|a| &a.clock)
    }

    pub fn mentions(&self, clock: &ClockId) -> bool {
        self.atoms.iter().any(|a| &a.clock == clock)
    }

    /// Same constraint with every `x == n` split into `x <= n && x >= n`.
    pub fn expanded(&self) -> ClockConstraint {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            if a.relation == Relation::Eq {
                atoms.push(ClockAtom { relation: Relation::Le, ..a.clone() });
                atoms.push(ClockAtom { relation: Relation::Ge, ..a.clone() });
            } else {
                atoms.push(a.clone());
            }
        }
        ClockConstraint { atoms }
    }

    pub fn max_bound(&self) -> u32 {
        self.atoms.iter().map(|a| a.bound).max().unwrap_or(0)
    }

    fn rename(&mut self, map: &HashMap<ClockId, ClockId>) {
        for a in &mut self.atoms {
            if let Some(new) = map.get(&a.clock) {
                a.clock = new.clone();
            }
        }
    }
}

impl fmt::Display for ClockConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClockOrigin {
    DescriptionCondition,
    Invariant,
    SpecInstrumentation,
}

impl ClockOrigin {
    /// Clocks created from description sentences; only these are reduced.
    pub fn is_description(&self) -> bool {
        !matches!(self, ClockOrigin::SpecInstrumentation)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clock {
    pub id: ClockId,
    pub origin: ClockOrigin,
    /// Order-independent identity derived from the sentence that created the
    /// clock. Drives canonical numbering.
    pub key: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Send,
    Receive,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SyncLabel {
    pub channel: String,
    pub direction: Direction,
}

impl fmt::Display for SyncLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = match self.direction {
            Direction::Send => '!',
            Direction::Receive => '?',
        };
        write!(f, "{}{}", self.channel, mark)
    }
}

/// Where an IR element came from.
///
/// Equality looks only at `canonical` (the normalized sentence), so networks
/// built from reordered input compare equal.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub canonical: String,
    pub sentence: String,
    pub span: Span,
}

impl PartialEq for Provenance {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for Provenance {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: String,
    pub target: String,
    pub sync: Option<SyncLabel>,
    pub resets: BTreeSet<ClockId>,
    pub guard: ClockConstraint,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaModel {
    pub name: String,
    pub locations: Vec<String>,
    pub initial: String,
    pub clocks: Vec<Clock>,
    pub invariants: BTreeMap<String, ClockConstraint>,
    pub transitions: Vec<Transition>,
    pub provenance: Provenance,
}

impl TaModel {
    pub fn new(name: impl Into<String>, locations: Vec<String>, initial: impl Into<String>) -> Self {
        TaModel {
            name: name.into(),
            locations,
            initial: initial.into(),
            clocks: Vec::new(),
            invariants: BTreeMap::new(),
            transitions: Vec::new(),
            provenance: Provenance::default(),
        }
    }

    pub fn has_location(&self, name: &str) -> bool {
        self.locations.iter().any(|l| l == name)
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn clock(&self, id: &ClockId) -> Option<&Clock> {
        self.clocks.iter().find(|c| &c.id == id)
    }

    pub fn description_clocks(&self) -> impl Iterator<Item = &Clock> {
        self.clocks.iter().filter(|c| c.origin.is_description())
    }

    pub fn invariant(&self, location: &str) -> Option<&ClockConstraint> {
        self.invariants.get(location).filter(|c| !c.is_empty())
    }

    /// Largest constant in any guard or invariant.
    pub fn max_bound(&self) -> u32 {
        let guards = self.transitions.iter().map(|t| t.guard.max_bound());
        let invs = self.invariants.values().map(ClockConstraint::max_bound);
        guards.chain(invs).max().unwrap_or(0)
    }

    /// Renames clocks everywhere they occur. Ids absent from `map` are kept.
    pub fn rename_clocks(&mut self, map: &HashMap<ClockId, ClockId>) {
        for c in &mut self.clocks {
            if let Some(new) = map.get(&c.id) {
                c.id = new.clone();
            }
        }
        for t in &mut self.transitions {
            t.guard.rename(map);
            t.resets = t
                .resets
                .iter()
                .map(|c| map.get(c).unwrap_or(c).clone())
                .collect();
        }
        for inv in self.invariants.values_mut() {
            inv.rename(map);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaNetwork {
    pub automata: Vec<TaModel>,
    pub channels: BTreeSet<String>,
}

impl TaNetwork {
    pub fn automaton(&self, name: &str) -> Option<&TaModel> {
        self.automata.iter().find(|a| a.name == name)
    }

    pub fn automaton_mut(&mut self, name: &str) -> Option<&mut TaModel> {
        self.automata.iter_mut().find(|a| a.name == name)
    }

    pub fn max_bound(&self) -> u32 {
        self.automata.iter().map(TaModel::max_bound).max().unwrap_or(0)
    }
}

/// Order-normalizes a network: automata by name, channels sorted, transitions
/// by (source, target, sync, guard shape, originating sentence), description
/// clocks renumbered `c0, c1, …` in discovery order over the sorted
/// transitions and then the invariants.
pub fn canonicalize(network: &TaNetwork) -> TaNetwork {
    let mut automata: Vec<TaModel> = network.automata.iter().map(canonicalize_model).collect();
    automata.sort_by(|a, b| a.name.cmp(&b.name));
    TaNetwork {
        automata,
        channels: network.channels.clone(),
    }
}

pub fn canonicalize_model(model: &TaModel) -> TaModel {
    let mut m = model.clone();
    let keys: HashMap<ClockId, String> =
        m.clocks.iter().map(|c| (c.id.clone(), c.key.clone())).collect();
    let key_of = |id: &ClockId| keys.get(id).cloned().unwrap_or_else(|| id.0.clone());
    let atom_order = |a: &ClockAtom, b: &ClockAtom| {
        (key_of(&a.clock), a.relation, a.bound).cmp(&(key_of(&b.clock), b.relation, b.bound))
    };

    for t in &mut m.transitions {
        t.guard.atoms.sort_by(atom_order);
    }
    for inv in m.invariants.values_mut() {
        inv.atoms.sort_by(atom_order);
        inv.atoms.dedup();
    }
    m.invariants.retain(|_, inv| !inv.is_empty());

    let loc_idx: HashMap<&str, usize> = model
        .locations
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let loc = |name: &str| loc_idx.get(name).copied().unwrap_or(usize::MAX);
    m.transitions.sort_by(|a, b| {
        let shape = |t: &Transition| -> Vec<(Relation, u32)> {
            t.guard.atoms.iter().map(|x| (x.relation, x.bound)).collect()
        };
        (loc(&a.source), loc(&a.target), &a.sync, shape(a), &a.provenance.canonical).cmp(&(
            loc(&b.source),
            loc(&b.target),
            &b.sync,
            shape(b),
            &b.provenance.canonical,
        ))
    });

    // Discovery order of description clocks.
    let is_desc: HashSet<ClockId> = m
        .clocks
        .iter()
        .filter(|c| c.origin.is_description())
        .map(|c| c.id.clone())
        .collect();
    let mut order: Vec<ClockId> = Vec::new();
    let mut seen: HashSet<ClockId> = HashSet::new();
    let mut visit = |id: &ClockId, order: &mut Vec<ClockId>| {
        if is_desc.contains(id) && seen.insert(id.clone()) {
            order.push(id.clone());
        }
    };
    for t in &m.transitions {
        for a in &t.guard.atoms {
            visit(&a.clock, &mut order);
        }
        let mut resets: Vec<&ClockId> = t.resets.iter().collect();
        resets.sort_by_key(|id| key_of(id));
        for id in resets {
            visit(id, &mut order);
        }
    }
    for l in &m.locations {
        if let Some(inv) = m.invariants.get(l) {
            for a in &inv.atoms {
                visit(&a.clock, &mut order);
            }
        }
    }
    let mut rest: Vec<&Clock> = m
        .clocks
        .iter()
        .filter(|c| c.origin.is_description() && !order.contains(&c.id))
        .collect();
    rest.sort_by(|a, b| a.key.cmp(&b.key));
    order.extend(rest.into_iter().map(|c| c.id.clone()));

    // Rename through fresh temporaries so old and new names never collide.
    let tmp: HashMap<ClockId, ClockId> = order
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), ClockId(format!("__tmp{i}"))))
        .collect();
    m.rename_clocks(&tmp);
    let fin: HashMap<ClockId, ClockId> = (0..order.len())
        .map(|i| (ClockId(format!("__tmp{i}")), ClockId(format!("c{i}"))))
        .collect();
    m.rename_clocks(&fin);

    m.clocks.sort_by(|a, b| {
        (!a.origin.is_description(), &a.id).cmp(&(!b.origin.is_description(), &b.id))
    });
    m
}

/// Checks the IR invariants. Returns one diagnostic per violation; empty
/// means the network is well formed.
pub fn structural_check(network: &TaNetwork) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut names = HashSet::new();
    for m in &network.automata {
        let at_model = |msg: String| {
            Diagnostic::error(Code::DuplicateName, msg, m.provenance.sentence.clone(), m.provenance.span)
        };
        if !names.insert(m.name.as_str()) {
            out.push(at_model(format!("automaton `{}` is declared more than once", m.name)));
        }
        let mut locs = HashSet::new();
        for l in &m.locations {
            if !locs.insert(l.as_str()) {
                out.push(at_model(format!("location `{l}` is declared twice in `{}`", m.name)));
            }
        }
        if !m.has_location(&m.initial) {
            out.push(Diagnostic::error(
                Code::ConflictingInitial,
                format!("initial location `{}` is not a location of `{}`", m.initial, m.name),
                m.provenance.sentence.clone(),
                m.provenance.span,
            ));
        }
        let mut clocks = HashSet::new();
        for c in &m.clocks {
            if !clocks.insert(&c.id) {
                out.push(at_model(format!("clock `{}` is declared twice in `{}`", c.id, m.name)));
            }
        }
        let unknown_clock = |id: &ClockId, p: &Provenance| {
            Diagnostic::error(
                Code::UnknownClock,
                format!("clock `{id}` is not declared in `{}`", m.name),
                p.sentence.clone(),
                p.span,
            )
        };
        for t in &m.transitions {
            for end in [&t.source, &t.target] {
                if !m.has_location(end) {
                    out.push(Diagnostic::error(
                        Code::UnknownLocation,
                        format!("location `{end}` is not declared in `{}`", m.name),
                        t.provenance.sentence.clone(),
                        t.provenance.span,
                    ));
                }
            }
            for id in t.guard.clocks().chain(t.resets.iter()) {
                if !clocks.contains(id) {
                    out.push(unknown_clock(id, &t.provenance));
                }
            }
            if let Some(sync) = &t.sync {
                if !network.channels.contains(&sync.channel) {
                    out.push(Diagnostic::error(
                        Code::UnknownChannel,
                        format!("channel `{}` is not declared", sync.channel),
                        t.provenance.sentence.clone(),
                        t.provenance.span,
                    ));
                }
            }
        }
        for (loc, inv) in &m.invariants {
            if !m.has_location(loc) {
                out.push(Diagnostic::error(
                    Code::UnknownLocation,
                    format!("invariant on undeclared location `{loc}` in `{}`", m.name),
                    m.provenance.sentence.clone(),
                    m.provenance.span,
                ));
            }
            for id in inv.clocks() {
                if !clocks.contains(id) {
                    out.push(unknown_clock(id, &m.provenance));
                }
            }
        }
    }
    out
}

impl fmt::Display for TaNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let channels: Vec<&str> = self.channels.iter().map(String::as_str).collect();
        writeln!(f, "channels: {}", channels.join(", "))?;
        for m in &self.automata {
            writeln!(f, "automaton {}", m.name)?;
            writeln!(f, "  locations: {} (initial {})", m.locations.join(", "), m.initial)?;
            let clocks: Vec<String> = m
                .clocks
                .iter()
                .map(|c| format!("{}:{:?}", c.id, c.origin))
                .collect();
            writeln!(f, "  clocks: {}", clocks.join(", "))?;
            for l in &m.locations {
                if let Some(inv) = m.invariant(l) {
                    writeln!(f, "  invariant {l}: {inv}")?;
                }
            }
            for t in &m.transitions {
                write!(f, "  {} -> {}", t.source, t.target)?;
                if let Some(s) = &t.sync {
                    write!(f, " [{s}]")?;
                }
                if !t.guard.is_empty() {
                    write!(f, " guard {}", t.guard)?;
                }
                if !t.resets.is_empty() {
                    let r: Vec<&str> = t.resets.iter().map(ClockId::as_str).collect();
                    write!(f, " reset {}", r.join(", "))?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

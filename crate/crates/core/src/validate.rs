//! Post-build analyses: untimed reachability and a timed-run sampler used to
//! check that clock reduction does not change behaviour.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagnostics::{Code, Diagnostic};
use crate::frontend::ast::Relation;
use crate::model::{ClockConstraint, ClockId, Direction, TaModel, TaNetwork};

/// Locations reachable from the initial one, ignoring guards, invariants and
/// synchronisation.
pub fn untimed_reachability(model: &TaModel) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([model.initial.clone()]);
    let mut queue = VecDeque::from([model.initial.as_str()]);
    while let Some(at) = queue.pop_front() {
        for t in model.transitions.iter().filter(|t| t.source == at) {
            if seen.insert(t.target.clone()) {
                queue.push_back(&t.target);
            }
        }
    }
    seen
}

pub fn reachability_warnings(network: &TaNetwork) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for m in &network.automata {
        let reached = untimed_reachability(m);
        for l in m.locations.iter().filter(|l| !reached.contains(*l)) {
            out.push(Diagnostic::warning(
                Code::UnreachableLocation,
                format!("location `{l}` of `{}` is unreachable from `{}`", m.name, m.initial),
                m.provenance.sentence.clone(),
                m.provenance.span,
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Internal { automaton: usize, transition: usize },
    /// `(automaton, transition)` of the `!` and `?` sides.
    Sync { sender: (usize, usize), receiver: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    /// In units of `1 / scale`.
    pub delay: u64,
    /// `None` when time passed and nothing fired.
    pub action: Option<Action>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub steps: Vec<Step>,
    /// The run ended because time could not pass and nothing was enabled.
    pub timelocked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub count: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Delays are multiples of `1 / scale`; 2 samples half units.
    pub scale: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 1000,
            horizon: 20,
            seed: 0,
            scale: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("networks differ in structure: {0}")]
pub struct StructureMismatch(pub String);

#[derive(Debug, Clone)]
struct State {
    locations: Vec<usize>,
    clocks: Vec<Vec<u64>>,
}

/// What one network allows at one point of a run: for every candidate delay,
/// `None` if an invariant forbids it, else the actions enabled after it.
type Observation = Vec<Option<BTreeSet<Action>>>;

/// `(clock index, relation, scaled bound)`.
type Atom = (usize, Relation, u64);

struct Edge {
    target: usize,
    guard: Vec<Atom>,
    resets: Vec<usize>,
    sync: Option<(String, Direction)>,
}

/// One automaton with names resolved to indices.
struct Compiled {
    invariants: Vec<Vec<Atom>>,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<usize>>,
    initial: usize,
    clock_count: usize,
}

impl Compiled {
    fn new(m: &TaModel, scale: u64) -> Self {
        let mut ids: Vec<&ClockId> = m.clocks.iter().map(|c| &c.id).collect();
        // Clocks referenced without a declaration still get a slot.
        for t in &m.transitions {
            ids.extend(t.guard.clocks().chain(&t.resets));
        }
        for inv in m.invariants.values() {
            ids.extend(inv.clocks());
        }
        let mut index: HashMap<&ClockId, usize> = HashMap::new();
        for id in ids {
            let next = index.len();
            index.entry(id).or_insert(next);
        }
        let atoms = |c: &ClockConstraint| -> Vec<Atom> {
            c.atoms
                .iter()
                .map(|a| (index[&a.clock], a.relation, u64::from(a.bound) * scale))
                .collect()
        };
        let loc = |name: &str| m.location_index(name).unwrap_or(0);
        let edges: Vec<Edge> = m
            .transitions
            .iter()
            .map(|t| Edge {
                target: loc(&t.target),
                guard: atoms(&t.guard),
                resets: t.resets.iter().map(|c| index[c]).collect(),
                sync: t.sync.as_ref().map(|s| (s.channel.clone(), s.direction)),
            })
            .collect();
        let mut outgoing = vec![Vec::new(); m.locations.len()];
        for (i, t) in m.transitions.iter().enumerate() {
            outgoing[loc(&t.source)].push(i);
        }
        Compiled {
            invariants: m
                .locations
                .iter()
                .map(|l| m.invariant(l).map(atoms).unwrap_or_default())
                .collect(),
            edges,
            outgoing,
            initial: loc(&m.initial),
            clock_count: index.len(),
        }
    }
}

fn satisfied(atoms: &[Atom], clocks: &[u64], delay: u64) -> bool {
    atoms.iter().all(|&(c, rel, bound)| rel.holds(clocks[c] + delay, bound))
}

struct Simulator {
    automata: Vec<Compiled>,
    max_delay: u64,
}

impl Simulator {
    fn new(network: &TaNetwork, scale: u64, max_constant: u32) -> Self {
        let scale = scale.max(1);
        Simulator {
            automata: network.automata.iter().map(|m| Compiled::new(m, scale)).collect(),
            max_delay: (u64::from(max_constant) + 1) * scale,
        }
    }

    fn initial(&self) -> State {
        State {
            locations: self.automata.iter().map(|a| a.initial).collect(),
            clocks: self.automata.iter().map(|a| vec![0; a.clock_count]).collect(),
        }
    }

    /// Invariants are convex, so checking both ends of the delay suffices.
    fn delay_allowed(&self, state: &State, delay: u64) -> bool {
        self.automata.iter().enumerate().all(|(i, a)| {
            let inv = &a.invariants[state.locations[i]];
            satisfied(inv, &state.clocks[i], 0) && satisfied(inv, &state.clocks[i], delay)
        })
    }

    /// Guard after the delay, then the target invariant after the resets.
    fn ready(&self, state: &State, a: usize, e: &Edge, delay: u64) -> bool {
        let clocks = &state.clocks[a];
        if !satisfied(&e.guard, clocks, delay) {
            return false;
        }
        self.automata[a].invariants[e.target].iter().all(|&(c, rel, bound)| {
            let v = if e.resets.contains(&c) { 0 } else { clocks[c] + delay };
            rel.holds(v, bound)
        })
    }

    fn enabled(&self, state: &State, delay: u64) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        for (a, aut) in self.automata.iter().enumerate() {
            for &ti in &aut.outgoing[state.locations[a]] {
                let e = &aut.edges[ti];
                match &e.sync {
                    None if self.ready(state, a, e, delay) => {
                        out.insert(Action::Internal { automaton: a, transition: ti });
                    }
                    Some((ch, Direction::Send)) if self.ready(state, a, e, delay) => {
                        for (b, other) in self.automata.iter().enumerate().filter(|&(b, _)| b != a) {
                            for &ri in &other.outgoing[state.locations[b]] {
                                let r = &other.edges[ri];
                                let pairs = matches!(&r.sync, Some((rc, Direction::Receive)) if rc == ch);
                                if pairs && self.ready(state, b, r, delay) {
                                    out.insert(Action::Sync { sender: (a, ti), receiver: (b, ri) });
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    fn observe(&self, state: &State) -> Observation {
        (0..=self.max_delay)
            .map(|d| self.delay_allowed(state, d).then(|| self.enabled(state, d)))
            .collect()
    }

    fn fire(&self, state: &mut State, a: usize, ti: usize) {
        let e = &self.automata[a].edges[ti];
        debug_assert!(satisfied(&e.guard, &state.clocks[a], 0), "guard violated at firing time");
        for &c in &e.resets {
            state.clocks[a][c] = 0;
        }
        state.locations[a] = e.target;
    }

    fn apply(&self, state: &mut State, step: &Step) {
        debug_assert!(self.delay_allowed(state, step.delay), "invariant violated during delay");
        for clocks in &mut state.clocks {
            for v in clocks.iter_mut() {
                *v += step.delay;
            }
        }
        match step.action {
            None => {}
            Some(Action::Internal { automaton, transition }) => self.fire(state, automaton, transition),
            Some(Action::Sync { sender, receiver }) => {
                self.fire(state, sender.0, sender.1);
                self.fire(state, receiver.0, receiver.1);
            }
        }
        debug_assert!(self.delay_allowed(state, 0), "invariant violated after action");
    }

    fn sample(&self, rng: &mut ChaCha8Rng, horizon: usize) -> Run {
        let mut state = self.initial();
        let mut steps = Vec::new();
        for _ in 0..horizon {
            let obs = self.observe(&state);
            let allowed: Vec<u64> = (0..=self.max_delay).filter(|&d| obs[d as usize].is_some()).collect();
            let any_action = obs.iter().flatten().any(|s| !s.is_empty());
            let time_blocked = allowed.last() != Some(&self.max_delay);
            if allowed.is_empty() || (!any_action && time_blocked) {
                return Run { steps, timelocked: true };
            }
            let delay = *allowed.choose(rng).unwrap();
            let actions: Vec<Action> = obs[delay as usize].iter().flatten().copied().collect();
            let action = if actions.is_empty() {
                None
            } else {
                Some(actions[rng.gen_range(0..actions.len())])
            };
            let step = Step { delay, action };
            self.apply(&mut state, &step);
            steps.push(step);
        }
        Run { steps, timelocked: false }
    }
}

/// Samples `count` runs of at most `horizon` steps. Deterministic in `seed`.
pub fn sample_timed_runs(network: &TaNetwork, count: usize, horizon: usize, seed: u64) -> Vec<Run> {
    sample_with(network, &SampleConfig { count, horizon, seed, scale: 1 })
}

pub fn sample_with(network: &TaNetwork, config: &SampleConfig) -> Vec<Run> {
    let sim = Simulator::new(network, config.scale, network.max_bound());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.count).map(|_| sim.sample(&mut rng, config.horizon)).collect()
}

pub fn check_structure(a: &TaNetwork, b: &TaNetwork) -> Result<(), StructureMismatch> {
    let mismatch = |what: String| Err(StructureMismatch(what));
    if a.automata.len() != b.automata.len() {
        return mismatch(format!("{} vs {} automata", a.automata.len(), b.automata.len()));
    }
    for (ma, mb) in a.automata.iter().zip(&b.automata) {
        if ma.name != mb.name || ma.locations != mb.locations || ma.initial != mb.initial {
            return mismatch(format!("automaton `{}` vs `{}`", ma.name, mb.name));
        }
        if ma.transitions.len() != mb.transitions.len() {
            return mismatch(format!("transition count of `{}`", ma.name));
        }
        for (i, (ta, tb)) in ma.transitions.iter().zip(&mb.transitions).enumerate() {
            if (&ta.source, &ta.target, &ta.sync) != (&tb.source, &tb.target, &tb.sync) {
                return mismatch(format!("transition {i} of `{}`", ma.name));
            }
        }
    }
    Ok(())
}

/// Replays runs sampled on each network against both and compares what each
/// allows at every step. Both networks use the larger of their constants so
/// the delay ranges line up.
pub fn runs_equivalent(a: &TaNetwork, b: &TaNetwork, config: &SampleConfig) -> Result<bool, StructureMismatch> {
    check_structure(a, b)?;
    let max_constant = a.max_bound().max(b.max_bound());
    let sa = Simulator::new(a, config.scale, max_constant);
    let sb = Simulator::new(b, config.scale, max_constant);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let per_side = config.count.div_ceil(2);
    for (drive, _) in [(&sa, &sb), (&sb, &sa)] {
        for _ in 0..per_side {
            let run = drive.sample(&mut rng, config.horizon);
            if !replay_agrees(&sa, &sb, &run) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn replay_agrees(sa: &Simulator, sb: &Simulator, run: &Run) -> bool {
    let (mut xa, mut xb) = (sa.initial(), sb.initial());
    for step in &run.steps {
        if sa.observe(&xa) != sb.observe(&xb) {
            return false;
        }
        sa.apply(&mut xa, step);
        sb.apply(&mut xb, step);
    }
    sa.observe(&xa) == sb.observe(&xb)
}

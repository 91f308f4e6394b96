//! Parse trees for description and specification sentences.
//!
//! The `Display` impls print the canonical sentence for each tree: lowercase
//! keywords, no commas, a trailing period. Printing and reparsing yields an
//! equal tree, and the printed form doubles as a stable identity for a
//! sentence (used for deduplication and canonical ordering).

use std::fmt;

use crate::diagnostics::Span;

/// A user-chosen name (automaton, location or channel) with its position.
///
/// Equality and ordering look at the text only, so trees parsed from
/// differently laid-out input compare equal.
#[derive(Debug, Clone)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

impl Name {
    pub fn new(text: impl Into<String>) -> Self {
        Name {
            text: text.into(),
            span: Span::default(),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for Name {}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Entering,
    Leaving,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Entering => f.write_str("entering"),
            Mode::Leaving => f.write_str("leaving"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        }
    }

    pub fn holds(&self, value: u64, bound: u64) -> bool {
        match self {
            Relation::Lt => value < bound,
            Relation::Le => value <= bound,
            Relation::Gt => value > bound,
            Relation::Ge => value >= bound,
            Relation::Eq => value == bound,
        }
    }

    /// Complement of a lower bound, used to turn a forbidden region into an
    /// invariant: `not (x > n)` is `x <= n`, `not (x >= n)` is `x < n`.
    pub fn negate_lower(&self) -> Option<Relation> {
        match self {
            Relation::Gt => Some(Relation::Le),
            Relation::Ge => Some(Relation::Lt),
            _ => None,
        }
    }
}

/// One comparison inside a time constraint, e.g. "less than or equal to 10".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bound {
    pub relation: Relation,
    pub value: u32,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.relation {
            Relation::Gt => write!(f, "more than {}", self.value),
            Relation::Ge => write!(f, "more than or equal to {}", self.value),
            Relation::Lt => write!(f, "less than {}", self.value),
            Relation::Le => write!(f, "less than or equal to {}", self.value),
            Relation::Eq => write!(f, "equal to {}", self.value),
        }
    }
}

/// "the time spent after entering|leaving L is|cannot be ...". Bounds are a
/// conjunction over the same anchor and therefore share one clock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeCondition {
    pub mode: Mode,
    pub anchor: Name,
    pub bounds: Vec<Bound>,
}

fn join_bounds(f: &mut fmt::Formatter<'_>, bounds: &[Bound]) -> fmt::Result {
    for (i, b) in bounds.iter().enumerate() {
        if i > 0 {
            f.write_str(" and ")?;
        }
        write!(f, "{b}")?;
    }
    Ok(())
}

fn join_names(f: &mut fmt::Formatter<'_>, names: &[Name]) -> fmt::Result {
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{n}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitForm {
    /// "A can only be L"
    Single,
    /// "A can be L1 L2 and it is initially L1"
    Multiple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvariantForm {
    /// "for A the time spent in L cannot be ..."
    Short,
    /// "for A the time spent after entering L' cannot be ... in L"
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    Simple,
    Sync,
    SyncCond,
    TimeCond,
    TimeCondSync,
    SyncTimeCond,
}

impl TransitionKind {
    /// Whether a channel name appears in the sentence (sent or received).
    pub fn has_channel(&self) -> bool {
        !matches!(self, TransitionKind::Simple | TransitionKind::TimeCond)
    }

    pub fn has_time_conditions(&self) -> bool {
        matches!(
            self,
            TransitionKind::TimeCond | TransitionKind::TimeCondSync | TransitionKind::SyncTimeCond
        )
    }

    /// Whether the automaton sends on the channel (otherwise it receives).
    pub fn sends(&self) -> bool {
        matches!(self, TransitionKind::Sync | TransitionKind::TimeCondSync)
    }

    pub fn describe(&self) -> &'static str {
        match self {
            TransitionKind::Simple => "simple transition",
            TransitionKind::Sync => "synchronization transition",
            TransitionKind::SyncCond => "synchronization conditional simple transition",
            TransitionKind::TimeCond => "time conditional simple transition",
            TransitionKind::TimeCondSync => "time conditional synchronization transition",
            TransitionKind::SyncTimeCond => "synchronization-time conditional simple transition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitDecl {
    pub automaton: Name,
    pub locations: Vec<Name>,
    pub initial: Name,
    pub form: InitForm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantDecl {
    pub automaton: Name,
    /// Location the invariant is attached to.
    pub location: Name,
    pub form: InvariantForm,
    /// Forbidden regions, stated as lower bounds (`>` / `>=`) before negation.
    pub conditions: Vec<TimeCondition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDecl {
    pub kind: TransitionKind,
    pub automaton: Name,
    pub channel: Option<Name>,
    pub conditions: Vec<TimeCondition>,
    pub sources: Vec<Name>,
    pub targets: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Description {
    Init(InitDecl),
    Invariant(InvariantDecl),
    Transition(TransitionDecl),
}

impl Description {
    pub fn automaton(&self) -> &Name {
        match self {
            Description::Init(d) => &d.automaton,
            Description::Invariant(d) => &d.automaton,
            Description::Transition(d) => &d.automaton,
        }
    }

    pub fn rule(&self) -> &'static str {
        match self {
            Description::Init(InitDecl { form: InitForm::Single, .. }) => {
                "initialization (single location)"
            }
            Description::Init(_) => "initialization (several locations)",
            Description::Invariant(InvariantDecl { form: InvariantForm::Short, .. }) => {
                "invariant (time spent in a location)"
            }
            Description::Invariant(_) => "invariant (invariant condition in a location)",
            Description::Transition(t) => t.kind.describe(),
        }
    }
}

fn fmt_time_conditions(f: &mut fmt::Formatter<'_>, conds: &[TimeCondition], verb: &str) -> fmt::Result {
    for (i, c) in conds.iter().enumerate() {
        if i > 0 {
            f.write_str(" and ")?;
        }
        write!(f, "the time spent after {} {} {} ", c.mode, c.anchor, verb)?;
        join_bounds(f, &c.bounds)?;
    }
    Ok(())
}

impl fmt::Display for Description {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Description::Init(d) => match d.form {
                InitForm::Single => write!(f, "{} can only be {}.", d.automaton, d.initial),
                InitForm::Multiple => {
                    write!(f, "{} can be ", d.automaton)?;
                    join_names(f, &d.locations)?;
                    write!(f, " and it is initially {}.", d.initial)
                }
            },
            Description::Invariant(d) => match d.form {
                InvariantForm::Short => {
                    write!(f, "for {} the time spent in {} cannot be ", d.automaton, d.location)?;
                    join_bounds(f, &d.conditions[0].bounds)?;
                    f.write_str(".")
                }
                InvariantForm::Long => {
                    write!(f, "for {} ", d.automaton)?;
                    fmt_time_conditions(f, &d.conditions, "cannot be")?;
                    write!(f, " in {}.", d.location)
                }
            },
            Description::Transition(t) => {
                let channel = t.channel.as_ref().map(|c| c.text.as_str()).unwrap_or("");
                match t.kind {
                    TransitionKind::Simple | TransitionKind::Sync => {}
                    TransitionKind::SyncCond => write!(f, "if {channel} is received then ")?,
                    TransitionKind::TimeCond | TransitionKind::TimeCondSync => {
                        f.write_str("if ")?;
                        fmt_time_conditions(f, &t.conditions, "is")?;
                        f.write_str(" then ")?;
                    }
                    TransitionKind::SyncTimeCond => {
                        write!(f, "if {channel} is received and ")?;
                        fmt_time_conditions(f, &t.conditions, "is")?;
                        f.write_str(" then ")?;
                    }
                }
                write!(f, "{} can ", t.automaton)?;
                if t.kind.sends() {
                    write!(f, "send {channel} and ")?;
                }
                f.write_str("go from ")?;
                join_names(f, &t.sources)?;
                f.write_str(" to ")?;
                join_names(f, &t.targets)?;
                f.write_str(".")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathQuantifier {
    ShallAlways,
    ShallEventually,
    MightAlways,
    MightEventually,
}

impl fmt::Display for PathQuantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathQuantifier::ShallAlways => "shall always",
            PathQuantifier::ShallEventually => "shall eventually",
            PathQuantifier::MightAlways => "might always",
            PathQuantifier::MightEventually => "might eventually",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
    Implies,
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connective::And => "and",
            Connective::Or => "or",
            Connective::Implies => "implies",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecAtom {
    /// "for A the time spent after entering L is ..."
    Time { automaton: Name, condition: TimeCondition },
    /// "for A L1 L2 holds" / "for A L1 L2 does not hold"
    Location { automaton: Name, locations: Vec<Name>, holds: bool },
}

impl fmt::Display for SpecAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecAtom::Time { automaton, condition } => {
                write!(f, "for {automaton} ")?;
                fmt_time_conditions(f, std::slice::from_ref(condition), "is")
            }
            SpecAtom::Location { automaton, locations, holds } => {
                write!(f, "for {automaton} ")?;
                join_names(f, locations)?;
                f.write_str(if *holds { " holds" } else { " does not hold" })
            }
        }
    }
}

/// Right-leaning chain `atom (op atom)*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateFormula {
    Atom(SpecAtom),
    Chain { lhs: SpecAtom, op: Connective, rhs: Box<StateFormula> },
}

impl StateFormula {
    pub fn atoms(&self) -> Vec<&SpecAtom> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                StateFormula::Atom(a) => {
                    out.push(a);
                    return out;
                }
                StateFormula::Chain { lhs, rhs, .. } => {
                    out.push(lhs);
                    cur = rhs;
                }
            }
        }
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFormula::Atom(a) => write!(f, "{a}"),
            StateFormula::Chain { lhs, op, rhs } => write!(f, "{lhs} {op} {rhs}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Specification {
    General { quantifier: PathQuantifier, formula: StateFormula },
    Deadlock,
    LeadsTo(StateFormula, StateFormula),
    Shorthand { automaton: Name, location: Name, bound: u32 },
}

impl Specification {
    pub fn rule(&self) -> &'static str {
        match self {
            Specification::General { .. } => "general specification",
            Specification::Deadlock => "deadlock specification",
            Specification::LeadsTo(..) => "leads-to specification",
            Specification::Shorthand { .. } => "shorthand (location visited within a bound)",
        }
    }
}

impl fmt::Display for Specification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Specification::General { quantifier, formula } => {
                write!(f, "it {quantifier} be the case that {formula}.")
            }
            Specification::Deadlock => f.write_str("deadlock never occurs."),
            Specification::LeadsTo(lhs, rhs) => write!(f, "{lhs} leads to {rhs}."),
            Specification::Shorthand { automaton, location, bound } => {
                write!(f, "for {automaton} {location} shall hold within every {bound}.")
            }
        }
    }
}

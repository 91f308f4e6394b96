//! Specification trees to UPPAAL queries.
//!
//! Timed atoms and the shorthand rule need a clock that measures time since
//! entering or leaving a location. Such clocks are added to the owning
//! automaton as instrumentation clocks (`s0`, `s1`, …), reset by the mode's
//! rule and read only by the query.

use std::fmt;

use thiserror::Error;

use crate::diagnostics::{Code, Diagnostic, Span};
use crate::frontend::ast::{Connective, Mode, Name, PathQuantifier, SpecAtom, Specification, StateFormula};
use crate::frontend::{Parsed, Sentence};
use crate::model::{Clock, ClockId, ClockOrigin, Relation, TaModel, TaNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    /// `A[]`
    AllGlobally,
    /// `A<>`
    AllFinally,
    /// `E[]`
    ExistsGlobally,
    /// `E<>`
    ExistsFinally,
}

impl Quantifier {
    pub fn symbol(&self) -> &'static str {
        match self {
            Quantifier::AllGlobally => "A[]",
            Quantifier::AllFinally => "A<>",
            Quantifier::ExistsGlobally => "E[]",
            Quantifier::ExistsFinally => "E<>",
        }
    }
}

impl From<PathQuantifier> for Quantifier {
    fn from(q: PathQuantifier) -> Self {
        match q {
            PathQuantifier::ShallAlways => Quantifier::AllGlobally,
            PathQuantifier::ShallEventually => Quantifier::AllFinally,
            PathQuantifier::MightAlways => Quantifier::ExistsGlobally,
            PathQuantifier::MightEventually => Quantifier::ExistsFinally,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
    Imply,
}

impl BoolOp {
    pub fn keyword(&self) -> &'static str {
        match self {
            BoolOp::And => "and",
            BoolOp::Or => "or",
            BoolOp::Imply => "imply",
        }
    }
}

impl From<Connective> for BoolOp {
    fn from(c: Connective) -> Self {
        match c {
            Connective::And => BoolOp::And,
            Connective::Or => BoolOp::Or,
            Connective::Implies => BoolOp::Imply,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateExpr {
    /// The automaton is in one of `locations` (or in none, when `holds` is
    /// false).
    Location {
        automaton: String,
        locations: Vec<String>,
        holds: bool,
    },
    /// Conjunction of bounds on one clock of `automaton`.
    Clock {
        automaton: String,
        clock: ClockId,
        bounds: Vec<(Relation, u32)>,
    },
    Binary {
        lhs: Box<StateExpr>,
        op: BoolOp,
        rhs: Box<StateExpr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Path { quantifier: Quantifier, formula: StateExpr },
    LeadsTo(StateExpr, StateExpr),
    DeadlockFree,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Path { quantifier, formula } => {
                write!(f, "{} {}", quantifier.symbol(), render_state_formula(formula))
            }
            Query::LeadsTo(lhs, rhs) => write!(
                f,
                "{} --> {}",
                render_state_formula(lhs),
                render_state_formula(rhs)
            ),
            Query::DeadlockFree => f.write_str("A[] not deadlock"),
        }
    }
}

/// A query with the sentence it was compiled from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledQuery {
    pub query: Query,
    pub sentence: String,
}

/// Renders a state formula in UPPAAL syntax. Every composite operand is
/// parenthesized, so the output never depends on operator precedence
/// except for the prefix `not` on a single location.
pub fn render_state_formula(expr: &StateExpr) -> String {
    match expr {
        StateExpr::Location { automaton, locations, holds } => {
            let refs: Vec<String> = locations.iter().map(|l| format!("{automaton}.{l}")).collect();
            let body = if refs.len() == 1 {
                refs[0].clone()
            } else {
                format!("({})", refs.join(" or "))
            };
            if *holds {
                body
            } else {
                format!("not {body}")
            }
        }
        StateExpr::Clock { automaton, clock, bounds } => {
            let parts: Vec<String> = bounds
                .iter()
                .map(|(r, n)| format!("{automaton}.{clock} {} {n}", r.symbol()))
                .collect();
            if parts.len() == 1 {
                parts[0].clone()
            } else {
                format!("({})", parts.join(" and "))
            }
        }
        StateExpr::Binary { lhs, op, rhs } => {
            let side = |e: &StateExpr| match e {
                StateExpr::Binary { .. } => format!("({})", render_state_formula(e)),
                _ => render_state_formula(e),
            };
            format!("{} {} {}", side(lhs), op.keyword(), side(rhs))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("unknown automaton `{name}`")]
    UnknownAutomaton { name: String, span: Span },
    #[error("location `{location}` is not declared in `{automaton}`")]
    UnknownLocation { automaton: String, location: String, span: Span },
}

impl SpecError {
    pub fn to_diagnostic(&self, sentence: &Sentence) -> Diagnostic {
        let (code, span) = match self {
            SpecError::UnknownAutomaton { span, .. } => (Code::UnknownAutomaton, *span),
            SpecError::UnknownLocation { span, .. } => (Code::UnknownLocation, *span),
        };
        Diagnostic::error(code, self.to_string(), sentence.text.clone(), span)
    }
}

struct Compiler {
    network: TaNetwork,
}

impl Compiler {
    fn automaton(&self, name: &Name) -> Result<&TaModel, SpecError> {
        self.network.automaton(&name.text).ok_or_else(|| SpecError::UnknownAutomaton {
            name: name.text.clone(),
            span: name.span,
        })
    }

    fn check_location(&self, automaton: &Name, location: &Name) -> Result<(), SpecError> {
        if self.automaton(automaton)?.has_location(&location.text) {
            Ok(())
        } else {
            Err(SpecError::UnknownLocation {
                automaton: automaton.text.clone(),
                location: location.text.clone(),
                span: location.span,
            })
        }
    }

    fn instrument(&mut self, automaton: &Name, mode: Mode, anchor: &Name) -> Result<ClockId, SpecError> {
        self.check_location(automaton, anchor)?;
        let model = self
            .network
            .automaton_mut(&automaton.text)
            .expect("checked above");
        let n = (0..)
            .find(|i| model.clock(&ClockId(format!("s{i}"))).is_none())
            .expect("unbounded id supply");
        let id = ClockId(format!("s{n}"));
        model.clocks.push(Clock {
            id: id.clone(),
            origin: ClockOrigin::SpecInstrumentation,
            key: format!("s|{n:08}"),
        });
        for t in &mut model.transitions {
            let hit = match mode {
                Mode::Entering => t.target == anchor.text,
                Mode::Leaving => t.source == anchor.text,
            };
            if hit {
                t.resets.insert(id.clone());
            }
        }
        Ok(id)
    }

    fn atom(&mut self, atom: &SpecAtom) -> Result<StateExpr, SpecError> {
        match atom {
            SpecAtom::Location { automaton, locations, holds } => {
                for l in locations {
                    self.check_location(automaton, l)?;
                }
                Ok(StateExpr::Location {
                    automaton: automaton.text.clone(),
                    locations: locations.iter().map(|l| l.text.clone()).collect(),
                    holds: *holds,
                })
            }
            SpecAtom::Time { automaton, condition } => {
                let clock = self.instrument(automaton, condition.mode, &condition.anchor)?;
                Ok(StateExpr::Clock {
                    automaton: automaton.text.clone(),
                    clock,
                    bounds: condition.bounds.iter().map(|b| (b.relation, b.value)).collect(),
                })
            }
        }
    }

    fn formula(&mut self, f: &StateFormula) -> Result<StateExpr, SpecError> {
        match f {
            StateFormula::Atom(a) => self.atom(a),
            StateFormula::Chain { lhs, op, rhs } => {
                let lhs = self.atom(lhs)?;
                let rhs = self.formula(rhs)?;
                Ok(StateExpr::Binary {
                    lhs: Box::new(lhs),
                    op: (*op).into(),
                    rhs: Box::new(rhs),
                })
            }
        }
    }

    fn spec(&mut self, spec: &Specification) -> Result<Query, SpecError> {
        match spec {
            Specification::General { quantifier, formula } => Ok(Query::Path {
                quantifier: (*quantifier).into(),
                formula: self.formula(formula)?,
            }),
            Specification::Deadlock => Ok(Query::DeadlockFree),
            Specification::LeadsTo(lhs, rhs) => {
                let lhs = self.formula(lhs)?;
                let rhs = self.formula(rhs)?;
                Ok(Query::LeadsTo(lhs, rhs))
            }
            Specification::Shorthand { automaton, location, bound } => {
                let clock = self.instrument(automaton, Mode::Leaving, location)?;
                Ok(Query::Path {
                    quantifier: Quantifier::AllGlobally,
                    formula: StateExpr::Binary {
                        lhs: Box::new(StateExpr::Location {
                            automaton: automaton.text.clone(),
                            locations: vec![location.text.clone()],
                            holds: false,
                        }),
                        op: BoolOp::Or,
                        rhs: Box::new(StateExpr::Clock {
                            automaton: automaton.text.clone(),
                            clock,
                            bounds: vec![(Relation::Le, *bound)],
                        }),
                    },
                })
            }
        }
    }
}

/// Compiles one specification against `network`, returning the query and
/// the network with any instrumentation clocks added. On error the input
/// network is left as it was.
pub fn compile_spec(spec: &Specification, network: &TaNetwork) -> Result<(Query, TaNetwork), SpecError> {
    let mut compiler = Compiler { network: network.clone() };
    let query = compiler.spec(spec)?;
    Ok((query, compiler.network))
}

/// Compiles specifications in order, threading the network through.
pub fn compile_specs(
    specs: &[Parsed<Specification>],
    network: &TaNetwork,
) -> (Vec<CompiledQuery>, TaNetwork, Vec<Diagnostic>) {
    let mut net = network.clone();
    let mut queries = Vec::new();
    let mut diagnostics = Vec::new();
    for p in specs {
        match compile_spec(&p.ast, &net) {
            Ok((query, next)) => {
                net = next;
                queries.push(CompiledQuery {
                    query,
                    sentence: p.sentence.text.clone(),
                });
            }
            Err(e) => diagnostics.push(e.to_diagnostic(&p.sentence)),
        }
    }
    (queries, net, diagnostics)
}

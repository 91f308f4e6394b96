//! Random sentences and models drawn from the description and specification
//! grammars. Used by property tests and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::frontend::ast::{
    Bound, Connective, Description, InitDecl, InitForm, InvariantDecl, InvariantForm, Mode, Name,
    PathQuantifier, Relation, SpecAtom, Specification, StateFormula, TimeCondition, TransitionDecl,
    TransitionKind,
};
use crate::frontend::lexer::is_keyword;

const RELATIONS: [Relation; 5] = [Relation::Lt, Relation::Le, Relation::Gt, Relation::Ge, Relation::Eq];
/// Invariants name the forbidden region, which is always a lower bound.
const LOWER: [Relation; 2] = [Relation::Gt, Relation::Ge];

/// Capitalized identifier that is not a keyword.
pub fn identifier<R: Rng>(rng: &mut R) -> String {
    const HEAD: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    const TAIL: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";
    loop {
        let len = rng.gen_range(0..6);
        let mut s = String::new();
        s.push(HEAD[rng.gen_range(0..HEAD.len())] as char);
        for _ in 0..len {
            s.push(TAIL[rng.gen_range(0..TAIL.len())] as char);
        }
        if !is_keyword(&s) {
            return s;
        }
    }
}

fn name<R: Rng>(rng: &mut R) -> Name {
    Name::new(identifier(rng))
}

fn names<R: Rng>(rng: &mut R, max: usize) -> Vec<Name> {
    (0..rng.gen_range(1..=max)).map(|_| name(rng)).collect()
}

/// Channel names may also be keywords written with a capital, like `Go`.
fn channel<R: Rng>(rng: &mut R) -> Name {
    if rng.gen_bool(0.2) {
        Name::new(*["Go", "Stop", "Leave", "Send"].choose(rng).unwrap())
    } else {
        name(rng)
    }
}

fn bounds<R: Rng>(rng: &mut R, relations: &[Relation]) -> Vec<Bound> {
    (0..rng.gen_range(1..=2))
        .map(|_| Bound {
            relation: *relations.choose(rng).unwrap(),
            value: rng.gen_range(0..100),
        })
        .collect()
}

fn condition<R: Rng>(rng: &mut R, relations: &[Relation]) -> TimeCondition {
    TimeCondition {
        mode: if rng.gen_bool(0.5) { Mode::Entering } else { Mode::Leaving },
        anchor: name(rng),
        bounds: bounds(rng, relations),
    }
}

fn conditions<R: Rng>(rng: &mut R, relations: &[Relation]) -> Vec<TimeCondition> {
    (0..rng.gen_range(1..=2)).map(|_| condition(rng, relations)).collect()
}

pub fn random_description<R: Rng>(rng: &mut R) -> Description {
    match rng.gen_range(0..4) {
        0 => {
            let (locations, form) = if rng.gen_bool(0.3) {
                (vec![name(rng)], InitForm::Single)
            } else {
                (names(rng, 4), InitForm::Multiple)
            };
            let initial = locations.choose(rng).unwrap().clone();
            Description::Init(InitDecl {
                automaton: name(rng),
                locations: if form == InitForm::Single { vec![initial.clone()] } else { locations },
                initial,
                form,
            })
        }
        1 => {
            let location = name(rng);
            let (form, conditions) = if rng.gen_bool(0.5) {
                let cond = TimeCondition {
                    mode: Mode::Entering,
                    anchor: location.clone(),
                    bounds: bounds(rng, &LOWER),
                };
                (InvariantForm::Short, vec![cond])
            } else {
                (InvariantForm::Long, conditions(rng, &LOWER))
            };
            Description::Invariant(InvariantDecl {
                automaton: name(rng),
                location,
                form,
                conditions,
            })
        }
        _ => {
            let kind = *[
                TransitionKind::Simple,
                TransitionKind::Sync,
                TransitionKind::SyncCond,
                TransitionKind::TimeCond,
                TransitionKind::TimeCondSync,
                TransitionKind::SyncTimeCond,
            ]
            .choose(rng)
            .unwrap();
            Description::Transition(TransitionDecl {
                kind,
                automaton: name(rng),
                channel: kind.has_channel().then(|| channel(rng)),
                conditions: if kind.has_time_conditions() { conditions(rng, &RELATIONS) } else { Vec::new() },
                sources: names(rng, 3),
                targets: names(rng, 3),
            })
        }
    }
}

fn spec_atom<R: Rng>(rng: &mut R) -> SpecAtom {
    if rng.gen_bool(0.3) {
        SpecAtom::Time { automaton: name(rng), condition: condition(rng, &RELATIONS) }
    } else {
        SpecAtom::Location { automaton: name(rng), locations: names(rng, 3), holds: rng.gen_bool(0.6) }
    }
}

/// A chain of at most `depth` atoms.
pub fn random_state_formula<R: Rng>(rng: &mut R, depth: usize) -> StateFormula {
    let lhs = spec_atom(rng);
    if depth <= 1 || rng.gen_bool(0.4) {
        return StateFormula::Atom(lhs);
    }
    StateFormula::Chain {
        lhs,
        op: *[Connective::And, Connective::Or, Connective::Implies].choose(rng).unwrap(),
        rhs: Box::new(random_state_formula(rng, depth - 1)),
    }
}

pub fn random_specification<R: Rng>(rng: &mut R, depth: usize) -> Specification {
    match rng.gen_range(0..6) {
        0 => Specification::Deadlock,
        1 => Specification::LeadsTo(random_state_formula(rng, depth), random_state_formula(rng, depth)),
        2 => Specification::Shorthand {
            automaton: name(rng),
            location: name(rng),
            bound: rng.gen_range(0..200),
        },
        _ => Specification::General {
            quantifier: *[
                PathQuantifier::ShallAlways,
                PathQuantifier::ShallEventually,
                PathQuantifier::MightAlways,
                PathQuantifier::MightEventually,
            ]
            .choose(rng)
            .unwrap(),
            formula: random_state_formula(rng, depth),
        },
    }
}

/// Size limits for [`random_model`].
#[derive(Debug, Clone, Copy)]
pub struct ModelShape {
    pub max_locations: usize,
    pub max_timing: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape { max_locations: 6, max_timing: 4 }
    }
}

/// Description text for a small well-formed network: automaton `P` with up
/// to `max_locations` locations on a cycle plus extra edges, and a two-state
/// partner `Q` that talks to it over channels `Ping` and `Pong`. At most
/// `max_timing` sentences carry time conditions.
pub fn random_model<R: Rng>(rng: &mut R, shape: &ModelShape) -> Vec<String> {
    let n = rng.gen_range(2..=shape.max_locations.max(2));
    let locs: Vec<String> = (0..n).map(|i| format!("L{i}")).collect();
    let mut out = vec![format!("P can be {} and it is initially L0.", locs.join(" "))];
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for _ in 0..rng.gen_range(0..n) {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let mut timing = rng.gen_range(1..=shape.max_timing.max(1));
    let cond = |rng: &mut R| {
        let anchor = &locs[rng.gen_range(0..n)];
        let mode = if rng.gen_bool(0.5) { "entering" } else { "leaving" };
        let bound = match rng.gen_range(0..4) {
            0 => format!("more than {}", rng.gen_range(0..8)),
            1 => format!("less than or equal to {}", rng.gen_range(1..10)),
            2 => format!("more than or equal to {} and less than {}", rng.gen_range(0..4), rng.gen_range(5..10)),
            _ => format!("less than {}", rng.gen_range(1..10)),
        };
        format!("the time spent after {mode} {anchor} is {bound}")
    };
    for (s, t) in edges {
        let timed = timing > 0 && rng.gen_bool(0.6);
        if timed {
            timing -= 1;
        }
        let sentence = match (rng.gen_range(0..3), timed) {
            (0, false) => format!("P can go from {} to {}.", locs[s], locs[t]),
            (0, true) => format!("If {}, then P can go from {} to {}.", cond(rng), locs[s], locs[t]),
            (1, false) => format!("P can send Ping and go from {} to {}.", locs[s], locs[t]),
            (1, true) => format!("If {}, then P can send Ping and go from {} to {}.", cond(rng), locs[s], locs[t]),
            (_, false) => format!("If Pong is received, then P can go from {} to {}.", locs[s], locs[t]),
            (_, true) => format!(
                "If Pong is received and {}, then P can go from {} to {}.",
                cond(rng),
                locs[s],
                locs[t]
            ),
        };
        out.push(sentence);
    }
    while timing > 0 {
        timing -= 1;
        let l = &locs[rng.gen_range(0..n)];
        out.push(format!("For P, the time spent in {l} cannot be more than {}.", rng.gen_range(3..12)));
    }
    out.push("Q can be Idle Busy and it is initially Idle.".into());
    out.push("If Ping is received, then Q can go from Idle to Busy.".into());
    out.push("Q can send Pong and go from Busy to Idle.".into());
    out
}

//! Description trees to timed-automaton network.
//!
//! Every time condition gets its own fresh clock. Resets are placed in a
//! final pass over the complete network, so a transition that enters an
//! anchor location resets the anchor's clocks no matter which sentence
//! introduced it or where that sentence appeared.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::diagnostics::{Code, Diagnostic, Span};
use crate::frontend::ast::{
    Description, InitDecl, InvariantDecl, InvariantForm, Mode, Name, TimeCondition, TransitionDecl,
};
use crate::frontend::{Parsed, Sentence};
use crate::model::{
    canonicalize, Clock, ClockAtom, ClockConstraint, ClockId, ClockOrigin, Direction, Provenance,
    SyncLabel, TaModel, TaNetwork, Transition,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UseSite {
    /// A transition guard, identified by its endpoints.
    Guard { source: String, target: String },
    Invariant { location: String },
}

/// A clock created for one time condition, with the rule for its resets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionClockPlan {
    pub clock: ClockId,
    pub origin: ClockOrigin,
    pub mode: Mode,
    pub anchor: String,
    pub automaton: String,
    pub uses: Vec<(UseSite, ClockConstraint)>,
}

impl ConditionClockPlan {
    /// Whether `t` must reset this plan's clock.
    pub fn resets_on(&self, t: &Transition) -> bool {
        match self.mode {
            Mode::Entering => t.target == self.anchor,
            Mode::Leaving => t.source == self.anchor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("location `{location}` is not declared in `{automaton}`")]
    UnknownLocation { automaton: String, location: String, span: Span },
    #[error("automaton `{automaton}` has no initialization sentence")]
    MissingInit { automaton: String, span: Span },
}

impl BuildError {
    pub fn to_diagnostic(&self, sentence: &Sentence) -> Diagnostic {
        let (code, span) = match self {
            BuildError::UnknownLocation { span, .. } => (Code::UnknownLocation, *span),
            BuildError::MissingInit { span, .. } => (Code::MissingInit, *span),
        };
        Diagnostic::error(code, self.to_string(), sentence.text.clone(), span)
    }
}

/// Cartesian product of sources and targets, source-major.
pub fn expand_go<T: Clone>(sources: &[T], targets: &[T]) -> Vec<(T, T)> {
    sources
        .iter()
        .flat_map(|s| targets.iter().map(move |t| (s.clone(), t.clone())))
        .collect()
}

fn require_location(model: &TaModel, name: &Name) -> Result<(), BuildError> {
    if model.has_location(&name.text) {
        Ok(())
    } else {
        Err(BuildError::UnknownLocation {
            automaton: model.name.clone(),
            location: name.text.clone(),
            span: name.span,
        })
    }
}

fn fresh_clock_id(model: &TaModel, prefix: &str) -> ClockId {
    (0..)
        .map(|i| ClockId(format!("{prefix}{i}")))
        .find(|id| model.clock(id).is_none())
        .expect("unbounded id supply")
}

/// Translates a time condition into guard atoms on a fresh clock. The clock
/// is not registered on `model`; [`register_plan`] does that.
pub fn allocate_condition_clock(
    condition: &TimeCondition,
    model: &TaModel,
) -> Result<ConditionClockPlan, BuildError> {
    require_location(model, &condition.anchor)?;
    let clock = fresh_clock_id(model, "k");
    Ok(ConditionClockPlan {
        clock,
        origin: ClockOrigin::DescriptionCondition,
        mode: condition.mode,
        anchor: condition.anchor.text.clone(),
        automaton: model.name.clone(),
        uses: Vec::new(),
    })
}

/// Guard atoms for `condition` on `clock`.
pub fn guard_atoms(condition: &TimeCondition, clock: &ClockId) -> Vec<ClockAtom> {
    condition
        .bounds
        .iter()
        .map(|b| ClockAtom {
            clock: clock.clone(),
            relation: b.relation,
            bound: b.value,
        })
        .collect()
}

/// Adds the plan's clock to the model.
pub fn register_plan(model: &mut TaModel, plan: &ConditionClockPlan, key: String) {
    model.clocks.push(Clock {
        id: plan.clock.clone(),
        origin: plan.origin,
        key,
    });
}

/// Resets the plan's clock on every matching transition currently in the
/// model.
pub fn place_resets(model: &mut TaModel, plan: &ConditionClockPlan) {
    for t in &mut model.transitions {
        if plan.resets_on(t) {
            t.resets.insert(plan.clock.clone());
        }
    }
}

/// Attaches an invariant sentence to `model`: one fresh clock per condition,
/// the forbidden region negated into an upper bound on the location.
/// `key` identifies the sentence for canonical clock numbering.
pub fn apply_invariant(
    inv: &InvariantDecl,
    model: &mut TaModel,
    key: &str,
) -> Result<Vec<ConditionClockPlan>, BuildError> {
    require_location(model, &inv.location)?;
    for c in &inv.conditions {
        require_location(model, &c.anchor)?;
    }
    let mut plans = Vec::new();
    for (i, condition) in inv.conditions.iter().enumerate() {
        let mut plan = allocate_condition_clock(condition, model)?;
        plan.origin = ClockOrigin::Invariant;
        let atoms: Vec<ClockAtom> = condition
            .bounds
            .iter()
            .map(|b| ClockAtom {
                clock: plan.clock.clone(),
                relation: b
                    .relation
                    .negate_lower()
                    .expect("invariant constraints are lower bounds"),
                bound: b.value,
            })
            .collect();
        plan.uses.push((
            UseSite::Invariant { location: inv.location.text.clone() },
            ClockConstraint::new(atoms.clone()),
        ));
        register_plan(model, &plan, format!("i|{key}#{i}"));
        model
            .invariants
            .entry(inv.location.text.clone())
            .or_default()
            .atoms
            .extend(atoms);
        place_resets(model, &plan);
        plans.push(plan);
    }
    Ok(plans)
}

/// Adds the transitions of one sentence, allocating its condition clocks.
pub fn apply_transition(
    decl: &TransitionDecl,
    model: &mut TaModel,
    provenance: &Provenance,
) -> Result<Vec<ConditionClockPlan>, BuildError> {
    for n in decl.sources.iter().chain(&decl.targets) {
        require_location(model, n)?;
    }
    for c in &decl.conditions {
        require_location(model, &c.anchor)?;
    }
    let mut plans = Vec::new();
    let mut guard = Vec::new();
    for (i, condition) in decl.conditions.iter().enumerate() {
        let plan = allocate_condition_clock(condition, model)?;
        guard.extend(guard_atoms(condition, &plan.clock));
        register_plan(model, &plan, format!("d|{}#{i}", provenance.canonical));
        plans.push(plan);
    }
    let guard = ClockConstraint::new(guard);
    let sync = decl.channel.as_ref().map(|ch| SyncLabel {
        channel: ch.text.clone(),
        direction: if decl.kind.sends() { Direction::Send } else { Direction::Receive },
    });
    let sources: Vec<&str> = decl.sources.iter().map(|n| n.as_str()).collect();
    let targets: Vec<&str> = decl.targets.iter().map(|n| n.as_str()).collect();
    for (s, t) in expand_go(&sources, &targets) {
        model.transitions.push(Transition {
            source: s.to_string(),
            target: t.to_string(),
            sync: sync.clone(),
            resets: Default::default(),
            guard: guard.clone(),
            provenance: provenance.clone(),
        });
        for plan in &mut plans {
            let own: Vec<ClockAtom> = guard.atoms.iter().filter(|a| a.clock == plan.clock).cloned().collect();
            plan.uses.push((
                UseSite::Guard { source: s.to_string(), target: t.to_string() },
                ClockConstraint::new(own),
            ));
        }
    }
    for plan in &plans {
        place_resets(model, plan);
    }
    Ok(plans)
}

fn provenance_of(parsed: &Parsed<Description>) -> Provenance {
    Provenance {
        canonical: parsed.ast.to_string(),
        sentence: parsed.sentence.text.clone(),
        span: parsed.sentence.span,
    }
}

fn init_model(
    decl: &InitDecl,
    provenance: Provenance,
    sentence: &Sentence,
    diagnostics: &mut Vec<Diagnostic>,
) -> TaModel {
    let mut locations: Vec<String> = Vec::new();
    for loc in &decl.locations {
        if locations.contains(&loc.text) {
            diagnostics.push(Diagnostic::error(
                Code::DuplicateLocation,
                format!("location `{}` is listed twice", loc.text),
                sentence.text.clone(),
                loc.span,
            ));
        } else {
            locations.push(loc.text.clone());
        }
    }
    let mut initial = decl.initial.text.clone();
    if !locations.contains(&initial) {
        diagnostics.push(Diagnostic::error(
            Code::ConflictingInitial,
            format!(
                "initial location `{}` is not among the locations of `{}`",
                initial, decl.automaton
            ),
            sentence.text.clone(),
            decl.initial.span,
        ));
        initial = locations[0].clone();
    }
    let mut model = TaModel::new(decl.automaton.text.clone(), locations, initial);
    model.provenance = provenance;
    model
}

/// Builds the network described by `descriptions`. Sentences with errors
/// are reported and skipped; the rest still contribute.
pub fn build_network(descriptions: &[Parsed<Description>]) -> (TaNetwork, Vec<Diagnostic>) {
    let mut diagnostics = Vec::new();

    let mut seen = HashSet::new();
    let unique: Vec<&Parsed<Description>> = descriptions
        .iter()
        .filter(|p| seen.insert(p.ast.to_string()))
        .collect();

    let mut models: BTreeMap<String, TaModel> = BTreeMap::new();
    for p in &unique {
        let Description::Init(decl) = &p.ast else { continue };
        if models.contains_key(&decl.automaton.text) {
            diagnostics.push(Diagnostic::error(
                Code::DuplicateInit,
                format!("automaton `{}` is initialized more than once", decl.automaton),
                p.sentence.text.clone(),
                decl.automaton.span,
            ));
            continue;
        }
        let model = init_model(decl, provenance_of(p), &p.sentence, &mut diagnostics);
        models.insert(decl.automaton.text.clone(), model);
    }

    let mut channels = std::collections::BTreeSet::new();
    let mut plans: Vec<ConditionClockPlan> = Vec::new();
    for p in &unique {
        if matches!(p.ast, Description::Init(_)) {
            continue;
        }
        let automaton = p.ast.automaton();
        let Some(model) = models.get_mut(&automaton.text) else {
            let err = BuildError::MissingInit {
                automaton: automaton.text.clone(),
                span: automaton.span,
            };
            diagnostics.push(err.to_diagnostic(&p.sentence));
            continue;
        };
        let provenance = provenance_of(p);
        let result = match &p.ast {
            Description::Transition(decl) => {
                let r = apply_transition(decl, model, &provenance);
                if r.is_ok() {
                    if let Some(ch) = &decl.channel {
                        channels.insert(ch.text.clone());
                    }
                }
                r
            }
            Description::Invariant(decl) => {
                if decl.form == InvariantForm::Long {
                    for c in decl.conditions.iter().filter(|c| c.anchor != decl.location) {
                        diagnostics.push(Diagnostic::warning(
                            Code::AnchorMismatch,
                            format!(
                                "invariant on `{}` measures time since {} `{}`",
                                decl.location, c.mode, c.anchor
                            ),
                            p.sentence.text.clone(),
                            c.anchor.span,
                        ));
                    }
                }
                apply_invariant(decl, model, &provenance.canonical)
            }
            Description::Init(_) => unreachable!(),
        };
        match result {
            Ok(mut new_plans) => plans.append(&mut new_plans),
            Err(e) => diagnostics.push(e.to_diagnostic(&p.sentence)),
        }
    }

    // Resets over the final transition sets.
    for plan in &plans {
        if let Some(model) = models.get_mut(&plan.automaton) {
            place_resets(model, plan);
        }
    }

    if models.is_empty() && !diagnostics.iter().any(|d| d.code == Code::MissingInit) {
        diagnostics.push(Diagnostic::error(
            Code::MissingInit,
            "no automaton is initialized; expected a sentence like `A can be L1 L2 and it is initially L1`",
            "",
            Span::new(1, 1, 1),
        ));
    }

    let network = TaNetwork {
        automata: models.into_values().collect(),
        channels,
    };
    (canonicalize(&network), diagnostics)
}

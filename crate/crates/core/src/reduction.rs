//! Clock reduction by liveness-based renaming.
//!
//! This is register coalescing applied to clocks. A clock is live at a
//! location when its current value can still be read by a guard or an
//! invariant before the clock is next reset. Two clocks can share one name
//! when neither one is reset at a point from which the other's value is
//! still read.
//!
//! Only description clocks take part; instrumentation clocks added for
//! queries are left untouched.

use std::collections::{BTreeSet, HashMap};

use crate::model::{canonicalize_model, ClockId, TaModel, TaNetwork};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveRange {
    pub clock: ClockId,
    pub live_locations: BTreeSet<String>,
    /// Indices into `model.transitions` whose guard reads the clock or that
    /// carry its value unchanged into a location where it is live.
    pub live_transitions: BTreeSet<usize>,
}

impl LiveRange {
    pub fn is_empty(&self) -> bool {
        self.live_locations.is_empty() && self.live_transitions.is_empty()
    }
}

/// Backward fixed point over the location graph, one range per clock in
/// `model.clocks` order.
pub fn compute_live_ranges(model: &TaModel) -> Vec<LiveRange> {
    model.clocks.iter().map(|c| live_range_of(model, &c.id)).collect()
}

/// Live range of a clock given the model's current resets. Works for any
/// clock name, declared or not.
pub fn live_range_of(model: &TaModel, clock: &ClockId) -> LiveRange {
    let n = model.locations.len();
    let idx: HashMap<&str, usize> = model
        .locations
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut live = vec![false; n];
    for (l, inv) in &model.invariants {
        if inv.mentions(clock) {
            if let Some(&i) = idx.get(l.as_str()) {
                live[i] = true;
            }
        }
    }
    for t in &model.transitions {
        if t.guard.mentions(clock) {
            if let Some(&i) = idx.get(t.source.as_str()) {
                live[i] = true;
            }
        }
    }
    loop {
        let mut changed = false;
        for t in &model.transitions {
            let (Some(&s), Some(&d)) = (idx.get(t.source.as_str()), idx.get(t.target.as_str())) else {
                continue;
            };
            if !live[s] && live[d] && !t.resets.contains(clock) {
                live[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let live_locations = model
        .locations
        .iter()
        .zip(&live)
        .filter(|(_, &l)| l)
        .map(|(name, _)| name.clone())
        .collect();
    let live_transitions = model
        .transitions
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let carried = !t.resets.contains(clock)
                && idx.get(t.target.as_str()).is_some_and(|&d| live[d]);
            t.guard.mentions(clock) || carried
        })
        .map(|(i, _)| i)
        .collect();
    LiveRange {
        clock: clock.clone(),
        live_locations,
        live_transitions,
    }
}

fn resets_of(model: &TaModel, clock: &ClockId) -> BTreeSet<usize> {
    model
        .transitions
        .iter()
        .enumerate()
        .filter(|(_, t)| t.resets.contains(clock))
        .map(|(i, _)| i)
        .collect()
}

/// Whether the resets in `resets` would clobber `range`'s clock: a reset on
/// a transition not already resetting it, landing where it is live.
fn clobbers(model: &TaModel, resets: &BTreeSet<usize>, own: &BTreeSet<usize>, range: &LiveRange) -> bool {
    resets
        .difference(own)
        .any(|&t| range.live_locations.contains(&model.transitions[t].target))
}

/// Sharing one name changes a clock's value only after a reset that the
/// other clock lacks. That is harmless unless the value is read afterwards,
/// so the check is that no such reset lands where the other clock is live.
/// Identical reset sets and disjoint, non-clobbering ranges are special cases.
fn compatible(model: &TaModel, x: &ClockId, y: &ClockId) -> bool {
    let rx = resets_of(model, x);
    let ry = resets_of(model, y);
    if rx == ry {
        return true;
    }
    let lx = live_range_of(model, x);
    let ly = live_range_of(model, y);
    !clobbers(model, &ry, &rx, &lx) && !clobbers(model, &rx, &ry, &ly)
}

/// Renames `from` to `into` everywhere and drops `from` from the clock list.
fn merge(model: &mut TaModel, into: &ClockId, from: &ClockId) {
    let map: HashMap<ClockId, ClockId> = [(from.clone(), into.clone())].into();
    model.rename_clocks(&map);
    if let Some(pos) = model.clocks.iter().rposition(|c| &c.id == into) {
        let first = model.clocks.iter().position(|c| &c.id == into).unwrap();
        if pos != first {
            let removed = model.clocks.remove(pos);
            let keep = &mut model.clocks[first];
            if removed.key < keep.key {
                keep.key = removed.key;
            }
        }
    }
    for inv in model.invariants.values_mut() {
        inv.atoms.dedup();
    }
    for t in &mut model.transitions {
        t.guard.atoms.dedup();
    }
}

/// Greedy merge in canonical clock order, repeated until no pair merges.
/// The result is canonicalized; transition order is unchanged.
pub fn reduce_clocks(model: &TaModel) -> TaModel {
    let mut m = canonicalize_model(model);
    loop {
        let mut merged_any = false;
        let ids: Vec<ClockId> = m
            .clocks
            .iter()
            .filter(|c| c.origin.is_description())
            .map(|c| c.id.clone())
            .collect();
        let mut reps: Vec<ClockId> = Vec::new();
        for y in ids {
            match reps.iter().find(|x| compatible(&m, x, &y)) {
                Some(x) => {
                    let x = x.clone();
                    merge(&mut m, &x, &y);
                    merged_any = true;
                }
                None => reps.push(y),
            }
        }
        if !merged_any {
            break;
        }
    }
    canonicalize_model(&m)
}

pub fn reduce_network(network: &TaNetwork) -> TaNetwork {
    TaNetwork {
        automata: network.automata.iter().map(reduce_clocks).collect(),
        channels: network.channels.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build_network;
    use crate::frontend::parse_descriptions;
    use crate::model::ClockOrigin;

    fn model(text: &str) -> TaModel {
        let (parsed, diags) = parse_descriptions(text);
        assert!(diags.is_empty());
        let (net, diags) = build_network(&parsed);
        assert!(diags.is_empty(), "{diags:?}");
        net.automata.into_iter().next().unwrap()
    }

    const TRAIN: &str = "Train can be Safe Appr Cross Stop Start and it is initially Safe.
Train can send Appr and go from Safe to Appr.
If the time spent after entering Appr is more than or equal to 10, then Train can go from Appr to Cross.
If Stop is received and the time spent after entering Appr is less than or equal to 10, then Train can go from Appr to Stop.
If Go is received, then Train can go from Stop to Start.
If the time spent after entering Start is more than or equal to 7, then Train can go from Start to Cross.
If the time spent after entering Cross is more than or equal to 3, then Train can send Leave and go from Cross to Safe.
For Train, the time spent in Appr cannot be more than 20.
For Train, the time spent in Start cannot be more than 15.
For Train, the time spent in Cross cannot be more than 5.";

    /// Brute-force liveness: is there a path from `start` that reaches a use
    /// of `clock` before any reset of it? Explores simple paths only.
    fn live_by_paths(m: &TaModel, clock: &ClockId, start: &str) -> bool {
        fn go(m: &TaModel, clock: &ClockId, at: &str, visited: &mut Vec<String>) -> bool {
            if m.invariants.get(at).is_some_and(|i| i.mentions(clock)) {
                return true;
            }
            for t in m.transitions.iter().filter(|t| t.source == at) {
                if t.guard.mentions(clock) {
                    return true;
                }
                if t.resets.contains(clock) || visited.contains(&t.target) {
                    continue;
                }
                visited.push(t.target.clone());
                if go(m, clock, &t.target, visited) {
                    return true;
                }
                visited.pop();
            }
            false
        }
        go(m, clock, start, &mut vec![start.to_string()])
    }

    #[test]
    fn liveness_matches_path_enumeration() {
        let m = model(TRAIN);
        for range in compute_live_ranges(&m) {
            for l in &m.locations {
                assert_eq!(
                    range.live_locations.contains(l),
                    live_by_paths(&m, &range.clock, l),
                    "clock {} at {l}",
                    range.clock
                );
            }
        }
    }

    #[test]
    fn appr_guard_clock_lives_in_appr_only() {
        let m = model(TRAIN);
        let cross_guard = m
            .transitions
            .iter()
            .find(|t| t.source == "Appr" && t.target == "Cross")
            .unwrap();
        let clock = cross_guard.guard.atoms[0].clock.clone();
        let range = live_range_of(&m, &clock);
        assert_eq!(range.live_locations, BTreeSet::from(["Appr".to_string()]));
    }

    #[test]
    fn unused_clock_has_empty_range() {
        let m = model(TRAIN);
        assert!(live_range_of(&m, &ClockId::new("unused")).is_empty());
    }

    #[test]
    fn self_loop_use_and_reset() {
        let m = model("A can only be L.\nif the time spent after leaving L is more than 2 then A can go from L to L.");
        let range = live_range_of(&m, &m.clocks[0].id);
        assert_eq!(range.live_locations, BTreeSet::from(["L".to_string()]));
        assert_eq!(range.live_transitions, BTreeSet::from([0]));
    }

    #[test]
    fn train_reduces_to_one_clock() {
        let m = model(TRAIN);
        assert_eq!(m.description_clocks().count(), 7);
        let r = reduce_clocks(&m);
        assert_eq!(r.clocks.len(), 1);
        assert_eq!(r.clocks[0].id.as_str(), "c0");
        assert_eq!(r.transitions.len(), m.transitions.len());
        for (a, b) in m.transitions.iter().zip(&r.transitions) {
            assert_eq!((&a.source, &a.target, &a.sync), (&b.source, &b.target, &b.sync));
        }
    }

    #[test]
    fn reduction_is_idempotent_and_monotone() {
        let m = model(TRAIN);
        let once = reduce_clocks(&m);
        assert_eq!(reduce_clocks(&once), once);
        assert!(once.clocks.len() <= m.clocks.len());
    }

    #[test]
    fn zero_clocks_unchanged() {
        let m = model("A can be X Y and it is initially X.\nA can go from X to Y.");
        assert_eq!(reduce_clocks(&m), m);
    }

    #[test]
    fn overlapping_clocks_with_different_resets_stay_apart() {
        // Both clocks are read in Z; one measures time since entering Y,
        // the other since entering Z.
        let m = model(
            "A can be X Y Z and it is initially X.\nA can go from X to Y.\nA can go from Y to Z.\n\
             if the time spent after entering Y is more than 5 and the time spent after entering Z \
             is less than 2 then A can go from Z to X.",
        );
        assert_eq!(reduce_clocks(&m).clocks.len(), 2);
    }

    #[test]
    fn instrumentation_clocks_are_untouched() {
        let mut m = model(TRAIN);
        m.clocks.push(crate::model::Clock {
            id: ClockId::new("s0"),
            origin: ClockOrigin::SpecInstrumentation,
            key: "s|x".into(),
        });
        for t in &mut m.transitions {
            if t.source == "Free" || t.source == "Safe" {
                t.resets.insert(ClockId::new("s0"));
            }
        }
        let r = reduce_clocks(&m);
        let spec: Vec<_> = r.clocks.iter().filter(|c| !c.origin.is_description()).collect();
        assert_eq!(spec.len(), 1);
        assert_eq!(spec[0].id.as_str(), "s0");
        for (a, b) in m.transitions.iter().zip(&r.transitions) {
            assert_eq!(a.resets.contains(&ClockId::new("s0")), b.resets.contains(&ClockId::new("s0")));
        }
    }
}

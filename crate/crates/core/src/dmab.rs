//! Directed multi-armed-bandit power schedule: reward expectations over
//! unexplored branches, corpus-wide normalization, and energy assignment.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{Branch, ProgramGraph};
use crate::prob::{BranchStatsTable, SeedDistance, TraceView};

/// Clamp for the inverse distance when a seed already hits a target.
pub const DISTANCE_EPSILON: f64 = 1e-6;
/// Base mutation count before seed-characteristic scaling.
pub const BASE_ENERGY_E0: f64 = 128.0;

/// Where a corpus entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedOrigin {
    Initial,
    Fuzz,
    Solver,
}

/// One corpus entry with its scheduling state.
#[derive(Debug, Clone)]
pub struct SeedEntry {
    pub id: u64,
    pub input: Vec<u8>,
    pub trace: TraceView,
    /// Current seed distance under the active metric; `None` when no trace
    /// block has a finite distance.
    pub distance: Option<SeedDistance>,
    /// Uncovered sibling branches of the branches on this seed's trace.
    pub unexplored: BTreeSet<Branch>,
    pub base_energy: f64,
    pub reward_expectation: f64,
    pub found_at_us: u64,
    pub origin: SeedOrigin,
}

/// Energy granted to one seed for the coming cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAssignment {
    pub seed: u64,
    pub energy: f64,
    /// `energy` rounded up, at least one mutation.
    pub mutations: u64,
}

/// Sibling branches of traversed branches that global coverage has not
/// seen yet.
pub fn unexplored_branches(
    trace: &TraceView,
    covered: &BTreeSet<Branch>,
    g: &ProgramGraph,
) -> BTreeSet<Branch> {
    let mut out = BTreeSet::new();
    for br in trace.branches() {
        for &dst in g.successors(br.src) {
            let sibling = Branch { src: br.src, dst };
            if !covered.contains(&sibling) {
                out.insert(sibling);
            }
        }
    }
    out
}

/// Expected reward of mutating a seed: inverse distance times the mean
/// probability of its unexplored branches. Fully explored seeds (and seeds
/// without a usable distance) get 0.
pub fn reward_expectation(
    distance: Option<SeedDistance>,
    unexplored: &BTreeSet<Branch>,
    t: &BranchStatsTable,
) -> f64 {
    let d = match distance {
        Some(sd) => sd.value,
        None => return 0.0,
    };
    if unexplored.is_empty() {
        return 0.0;
    }
    let mean_p: f64 = unexplored
        .iter()
        .map(|&br| t.prob(br).unwrap_or(0.0))
        .sum::<f64>()
        / unexplored.len() as f64;
    (1.0 / d.max(DISTANCE_EPSILON)) * mean_p
}

/// Min-max normalization into [0, 1]; a degenerate range maps everything
/// to 0.5.
pub fn normalize(expectations: &BTreeMap<u64, f64>) -> BTreeMap<u64, f64> {
    let min = expectations.values().cloned().fold(f64::INFINITY, f64::min);
    let max = expectations.values().cloned().fold(f64::NEG_INFINITY, f64::max);
    expectations
        .iter()
        .map(|(&id, &e)| {
            let v = if max > min { (e - min) / (max - min) } else { 0.5 };
            (id, v)
        })
        .collect()
}

/// Maps a normalized expectation to energy. Seeds with work left scale the
/// base by `2^(10*E - 5)`; fully explored seeds drop to the minimum
/// multiplier.
pub fn assign_energy(seed: u64, base_energy: f64, normalized: Option<f64>) -> EnergyAssignment {
    let energy = match normalized {
        Some(e) => base_energy * (10.0 * e - 5.0).exp2(),
        None => base_energy / 32.0,
    };
    EnergyAssignment { seed, energy, mutations: (energy.ceil() as u64).max(1) }
}

fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

/// AFL-style base energy surrogate from execution speed and trace length
/// relative to the corpus averages, each clamped to [1/4, 4].
pub fn base_energy(
    exec_time_s: f64,
    trace_len: usize,
    avg_exec_time_s: f64,
    avg_trace_len: f64,
) -> f64 {
    let speed = clamp(avg_exec_time_s / exec_time_s, 0.25, 4.0);
    let length = clamp(trace_len as f64 / avg_trace_len, 0.25, 4.0);
    BASE_ENERGY_E0 * speed * length
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BlockId, ProgramGraph};
    use crate::prob::DEFAULT_REFRESH_INTERVAL_US;

    fn switch_graph() -> ProgramGraph {
        // 0 -> {1,2,3} (switch), 1 -> 4 (target), 1 -> 5
        ProgramGraph::build(
            0,
            &[4],
            (0..6).map(|i| (i, None, "main".into())).collect(),
            &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)],
            &[],
        )
        .unwrap()
    }

    #[test]
    fn uncovered_sibling_is_unexplored() {
        let g = switch_graph();
        let trace = TraceView::from_blocks(&g, vec![BlockId(0), BlockId(1)]).unwrap();
        let covered: BTreeSet<Branch> = [Branch::new(0, 1)].into_iter().collect();
        let theta = unexplored_branches(&trace, &covered, &g);
        assert_eq!(
            theta,
            [Branch::new(0, 2), Branch::new(0, 3)].into_iter().collect()
        );
    }

    #[test]
    fn fully_covered_neighborhood_is_empty() {
        let g = switch_graph();
        let trace = TraceView::from_blocks(&g, vec![BlockId(0), BlockId(1)]).unwrap();
        let covered: BTreeSet<Branch> =
            [Branch::new(0, 1), Branch::new(0, 2), Branch::new(0, 3)].into_iter().collect();
        assert!(unexplored_branches(&trace, &covered, &g).is_empty());
    }

    #[test]
    fn three_way_switch_leaves_two() {
        let g = switch_graph();
        let trace = TraceView::from_blocks(&g, vec![BlockId(0), BlockId(2)]).unwrap();
        let covered: BTreeSet<Branch> = [Branch::new(0, 2)].into_iter().collect();
        assert_eq!(unexplored_branches(&trace, &covered, &g).len(), 2);
    }

    #[test]
    fn reward_combines_distance_and_mean_probability() {
        let g = switch_graph();
        let mut t = BranchStatsTable::new(&g, DEFAULT_REFRESH_INTERVAL_US);
        // Group at 0 has 3 members: hits 5/1/4 -> probs 0.5/0.1/0.4.
        t.set_hits(Branch::new(0, 1), 5).unwrap();
        t.set_hits(Branch::new(0, 2), 1).unwrap();
        t.set_hits(Branch::new(0, 3), 4).unwrap();
        t.refresh_probabilities(DEFAULT_REFRESH_INTERVAL_US);
        let theta: BTreeSet<Branch> =
            [Branch::new(0, 1), Branch::new(0, 2)].into_iter().collect();
        let d = Some(SeedDistance { value: 2.0, is_target_hit: false });
        let e = reward_expectation(d, &theta, &t);
        assert!((e - 0.15).abs() < 1e-12, "got {e}");
    }

    #[test]
    fn reward_of_fully_explored_seed_is_zero() {
        let g = switch_graph();
        let t = BranchStatsTable::new(&g, DEFAULT_REFRESH_INTERVAL_US);
        let d = Some(SeedDistance { value: 2.0, is_target_hit: false });
        assert_eq!(reward_expectation(d, &BTreeSet::new(), &t), 0.0);
    }

    #[test]
    fn reward_with_zero_distance_uses_epsilon_clamp() {
        let g = switch_graph();
        let mut t = BranchStatsTable::new(&g, DEFAULT_REFRESH_INTERVAL_US);
        t.set_hits(Branch::new(1, 4), 1).unwrap();
        t.set_hits(Branch::new(1, 5), 1).unwrap();
        t.refresh_probabilities(DEFAULT_REFRESH_INTERVAL_US);
        let theta: BTreeSet<Branch> = [Branch::new(1, 4)].into_iter().collect();
        let e = reward_expectation(Some(SeedDistance::target_hit()), &theta, &t);
        assert!((e - 5e5).abs() < 1e-6, "got {e}");
    }

    #[test]
    fn normalize_affine_map() {
        let exps: BTreeMap<u64, f64> = [(1, 1.0), (2, 3.0), (3, 5.0)].into_iter().collect();
        let n = normalize(&exps);
        assert_eq!(n[&1], 0.0);
        assert_eq!(n[&2], 0.5);
        assert_eq!(n[&3], 1.0);
    }

    #[test]
    fn normalize_degenerate_cases() {
        let single: BTreeMap<u64, f64> = [(7, 0.3)].into_iter().collect();
        assert_eq!(normalize(&single)[&7], 0.5);
        let equal: BTreeMap<u64, f64> = [(1, 0.15), (2, 0.15)].into_iter().collect();
        let n = normalize(&equal);
        assert_eq!(n[&1], 0.5);
        assert_eq!(n[&2], 0.5);
    }

    #[test]
    fn energy_multiplier_endpoints() {
        assert!((assign_energy(0, 100.0, Some(0.5)).energy - 100.0).abs() < 1e-9);
        assert!((assign_energy(0, 100.0, Some(1.0)).energy - 3200.0).abs() < 1e-9);
        assert!((assign_energy(0, 100.0, Some(0.0)).energy - 3.125).abs() < 1e-9);
        let empty = assign_energy(0, 100.0, None);
        assert!((empty.energy - 3.125).abs() < 1e-9);
        assert_eq!(empty.mutations, 4);
    }

    #[test]
    fn base_energy_examples() {
        assert_eq!(base_energy(0.001, 10, 0.001, 10.0), 128.0);
        assert_eq!(base_energy(0.00025, 10, 0.001, 10.0), 512.0);
        assert_eq!(base_energy(0.008, 10, 0.001, 10.0), 32.0);
    }
}

//! Solver-side scheduling: seed prioritization for symbolic execution,
//! unreachable/unsolvable branch pruning, and the per-branch time-budget
//! ramp.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dmab::SeedEntry;
use crate::graph::{BbDistanceMap, Branch};
use crate::prob::{BranchStatsTable, MICROS_PER_SEC};
use crate::program::TargetProgram;

/// Additive shift applied after min-max normalization so scores never
/// divide by or multiply with zero.
pub const SCORE_SHIFT: f64 = 0.1;

/// Time-budget policy for constraint solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetPolicy {
    pub lower_us: u64,
    pub upper_us: u64,
    pub increment_us: u64,
}

impl Default for BudgetPolicy {
    fn default() -> Self {
        BudgetPolicy {
            lower_us: 5 * MICROS_PER_SEC,
            upper_us: 900 * MICROS_PER_SEC,
            increment_us: 60 * MICROS_PER_SEC,
        }
    }
}

/// Per-branch solving history. Attempt counts start at 1 for any branch
/// ever queued.
#[derive(Debug, Clone, Default)]
pub struct SolveAttemptStats {
    attempts: BTreeMap<Branch, u64>,
    pub unsolvable: BTreeSet<Branch>,
    pub solved: BTreeSet<Branch>,
}

impl SolveAttemptStats {
    pub fn sa(&self, br: Branch) -> u64 {
        self.attempts.get(&br).copied().unwrap_or(1).max(1)
    }

    pub fn note_attempt(&mut self, br: Branch) {
        let next = self.sa(br) + 1;
        self.attempts.insert(br, next);
    }

    pub fn mark_solved(&mut self, br: Branch) {
        self.solved.insert(br);
    }

    pub fn mark_unsolvable(&mut self, br: Branch) {
        self.unsolvable.insert(br);
    }
}

/// Outcome of one constraint-solving call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveOutcome {
    Solved,
    Failed,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverVerdict {
    pub outcome: SolveOutcome,
    /// Bytes produced on success; non-empty for `Solved`.
    pub input: Option<Vec<u8>>,
    pub cost_us: u64,
    /// A failure that is permanent for this seed's path constraints
    /// (conflicting byte demands), as opposed to the solver giving up.
    pub path_infeasible: bool,
}

/// Constraint-solver contract: flip `flip` on the path of `seed` within
/// `budget_us`. Cost never exceeds the granted budget.
pub trait SolverInterface {
    fn solve(&self, seed: &SeedEntry, flip: Branch, budget_us: u64) -> SolverVerdict;
}

/// Always fails at zero cost; used for the DGF-only ablation.
pub struct NullSolver;

impl SolverInterface for NullSolver {
    fn solve(&self, _seed: &SeedEntry, _flip: Branch, _budget_us: u64) -> SolverVerdict {
        SolverVerdict { outcome: SolveOutcome::Failed, input: None, cost_us: 0, path_infeasible: false }
    }
}

/// Drives the fixture's per-branch annotations: a branch solves iff it is
/// declared solvable, its declared cost fits the budget, and the flip is
/// feasible along the seed's path (patch-and-verify).
pub struct SimulatedSolver<'a> {
    program: &'a dyn TargetProgram,
}

impl<'a> SimulatedSolver<'a> {
    pub fn new(program: &'a dyn TargetProgram) -> Self {
        SimulatedSolver { program }
    }
}

impl SolverInterface for SimulatedSolver<'_> {
    fn solve(&self, seed: &SeedEntry, flip: Branch, budget_us: u64) -> SolverVerdict {
        let ann = self.program.solve_annotation(flip);
        if !ann.solvable {
            // Gives up after its declared churn time, bounded by the budget.
            return SolverVerdict {
                outcome: SolveOutcome::Failed,
                input: None,
                cost_us: ann.cost_us.min(budget_us),
                path_infeasible: false,
            };
        }
        if ann.cost_us > budget_us {
            return SolverVerdict {
                outcome: SolveOutcome::Timeout,
                input: None,
                cost_us: budget_us,
                path_infeasible: false,
            };
        }
        match self.program.try_flip(&seed.input, flip) {
            Some(bytes) => SolverVerdict {
                outcome: SolveOutcome::Solved,
                input: Some(bytes),
                cost_us: ann.cost_us,
                path_infeasible: false,
            },
            None => SolverVerdict {
                outcome: SolveOutcome::Failed,
                input: None,
                cost_us: ann.cost_us,
                path_infeasible: true,
            },
        }
    }
}

/// Estimated difficulty for the fuzzer: mean branch probability over the
/// unexplored set. `None` when there is nothing left to explore.
pub fn edf(unexplored: &BTreeSet<Branch>, t: &BranchStatsTable) -> Option<f64> {
    if unexplored.is_empty() {
        return None;
    }
    let sum: f64 = unexplored.iter().map(|&br| t.prob(br).unwrap_or(0.0)).sum();
    Some(sum / unexplored.len() as f64)
}

/// Estimated difficulty for the solver: mean solving attempts over the
/// unexplored set, unqueued branches counting as 1.
pub fn eds(unexplored: &BTreeSet<Branch>, stats: &SolveAttemptStats) -> Option<f64> {
    if unexplored.is_empty() {
        return None;
    }
    let sum: f64 = unexplored.iter().map(|&br| stats.sa(br) as f64).sum();
    Some(sum / unexplored.len() as f64)
}

/// Raw per-seed score inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreInputs {
    pub d_s: f64,
    pub edf: f64,
    pub eds: f64,
}

fn normalize_shifted(values: &BTreeMap<u64, f64>) -> BTreeMap<u64, f64> {
    crate::dmab::normalize(values)
        .into_iter()
        .map(|(id, v)| (id, v + SCORE_SHIFT))
        .collect()
}

/// `Score = EDF~ / (EDS~ * d~)` with min-max normalization over the queued
/// set, shifted into [0.1, 1.1].
pub fn priority_score(inputs: &BTreeMap<u64, ScoreInputs>) -> BTreeMap<u64, f64> {
    let edf_n = normalize_shifted(&inputs.iter().map(|(&id, s)| (id, s.edf)).collect());
    let eds_n = normalize_shifted(&inputs.iter().map(|(&id, s)| (id, s.eds)).collect());
    let d_n = normalize_shifted(&inputs.iter().map(|(&id, s)| (id, s.d_s)).collect());
    inputs
        .keys()
        .map(|&id| (id, edf_n[&id] / (eds_n[&id] * d_n[&id])))
        .collect()
}

/// Splits a branch set by destination reachability. Pruned branches are
/// never submitted to the solver.
pub fn prune_unreachable(
    theta: &BTreeSet<Branch>,
    d: &BbDistanceMap,
) -> (BTreeSet<Branch>, BTreeSet<Branch>) {
    let (kept, pruned): (BTreeSet<Branch>, BTreeSet<Branch>) =
        theta.iter().partition(|br| d.distance(br.dst).is_some());
    (kept, pruned)
}

/// `true` when `br` is known unsolvable or any taken branch earlier on the
/// seed's trace is: its path constraints subsume an unsolvable prefix.
pub fn prune_unsolvable(
    br: Branch,
    stats: &SolveAttemptStats,
    predecessor_chain: &[Branch],
) -> bool {
    stats.unsolvable.contains(&br)
        || predecessor_chain.iter().any(|b| stats.unsolvable.contains(b))
}

/// Time budget for the next attempt on `br`: ramps by one increment per
/// past attempt, capped at the policy upper bound.
pub fn budget_for(br: Branch, stats: &SolveAttemptStats, policy: &BudgetPolicy) -> u64 {
    let sa = stats.sa(br);
    policy
        .lower_us
        .saturating_add(policy.increment_us.saturating_mul(sa - 1))
        .min(policy.upper_us)
}

/// Prioritized seeds awaiting symbolic execution, highest score first with
/// seed-id tiebreak.
#[derive(Debug, Clone, Default)]
pub struct OsecQueue {
    entries: Vec<(u64, f64)>,
}

impl OsecQueue {
    pub fn from_scores(scores: &BTreeMap<u64, f64>) -> Self {
        let mut entries: Vec<(u64, f64)> = scores.iter().map(|(&id, &s)| (id, s)).collect();
        entries.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0))
        });
        OsecQueue { entries }
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn top(&self) -> Option<u64> {
        self.entries.first().map(|&(id, _)| id)
    }
}

/// Why OSEC dropped a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneReason {
    UnreachableDst,
    UnsolvableBranch,
    UnsolvableAncestor,
}

#[derive(Debug, Clone)]
pub struct PruneRecord {
    pub seed: u64,
    pub branch: Branch,
    pub reason: PruneReason,
}

#[derive(Debug, Clone)]
pub struct SolveRecord {
    pub seed: u64,
    pub branch: Branch,
    pub budget_us: u64,
    pub outcome: SolveOutcome,
    pub cost_us: u64,
}

/// New input produced by the solver, tagged with the branch it flips.
#[derive(Debug, Clone)]
pub struct SolverInput {
    pub flipped: Branch,
    pub bytes: Vec<u8>,
    pub from_seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct StepResult {
    pub popped: Option<u64>,
    pub prunes: Vec<PruneRecord>,
    pub solves: Vec<SolveRecord>,
    pub new_inputs: Vec<SolverInput>,
    pub cost_us: u64,
}

/// Solver-side campaign state: attempt statistics plus the bookkeeping of
/// prune decisions already taken.
#[derive(Debug, Clone, Default)]
pub struct OsecEngine {
    pub stats: SolveAttemptStats,
    pub policy: BudgetPolicy,
    /// Branch prunes already recorded, per seed.
    pruned_pairs: BTreeSet<(u64, Branch)>,
    /// (seed, branch) pairs whose flip is infeasible along that seed's
    /// path; retrying from the same seed cannot succeed.
    dead_pairs: BTreeSet<(u64, Branch)>,
    /// Branches pruned for unreachable destinations (campaign-long).
    pub pruned_unreachable: BTreeSet<Branch>,
    queue: OsecQueue,
}

impl OsecEngine {
    pub fn new(policy: BudgetPolicy) -> Self {
        OsecEngine { policy, ..Default::default() }
    }

    pub fn queue(&self) -> &OsecQueue {
        &self.queue
    }

    /// Unexplored branches of `seed` that still have an undecided fate
    /// from this seed's perspective.
    fn pending(&self, seed: &SeedEntry) -> Vec<Branch> {
        seed.unexplored
            .iter()
            .copied()
            .filter(|br| {
                !self.pruned_pairs.contains(&(seed.id, *br))
                    && !self.dead_pairs.contains(&(seed.id, *br))
            })
            .collect()
    }

    /// Rebuilds scores (full re-normalization) over seeds with pending
    /// solver work and a usable distance.
    pub fn rebuild_queue(&mut self, seeds: &BTreeMap<u64, SeedEntry>, t: &BranchStatsTable) {
        let mut inputs = BTreeMap::new();
        for (&id, s) in seeds {
            let Some(dist) = s.distance else { continue };
            if self.pending(s).is_empty() {
                continue;
            }
            let theta: BTreeSet<Branch> = self.pending(s).into_iter().collect();
            let (Some(edf_v), Some(eds_v)) = (edf(&theta, t), eds(&theta, &self.stats)) else {
                continue;
            };
            inputs.insert(id, ScoreInputs { d_s: dist.value, edf: edf_v, eds: eds_v });
        }
        self.queue = OsecQueue::from_scores(&priority_score(&inputs));
    }

    /// One iteration of the solver workflow: pop the highest-priority
    /// seed, prune its doomed branches, solve the kept ones, and re-sort.
    pub fn symbolic_step(
        &mut self,
        seeds: &BTreeMap<u64, SeedEntry>,
        dist: &BbDistanceMap,
        t: &BranchStatsTable,
        solver: &dyn SolverInterface,
    ) -> StepResult {
        let mut result = StepResult::default();
        self.rebuild_queue(seeds, t);
        let Some(top) = self.queue.top() else {
            return result;
        };
        let seed = &seeds[&top];
        result.popped = Some(top);

        for br in self.pending(seed) {
            if dist.distance(br.dst).is_none() {
                self.pruned_unreachable.insert(br);
                self.pruned_pairs.insert((top, br));
                result.prunes.push(PruneRecord {
                    seed: top,
                    branch: br,
                    reason: PruneReason::UnreachableDst,
                });
                continue;
            }
            let chain = seed.trace.prefix_branches(br.src).unwrap_or(&[]);
            if prune_unsolvable(br, &self.stats, chain) {
                let reason = if self.stats.unsolvable.contains(&br) {
                    PruneReason::UnsolvableBranch
                } else {
                    PruneReason::UnsolvableAncestor
                };
                self.pruned_pairs.insert((top, br));
                result.prunes.push(PruneRecord { seed: top, branch: br, reason });
                continue;
            }

            let budget = budget_for(br, &self.stats, &self.policy);
            let verdict = solver.solve(seed, br, budget);
            debug_assert!(verdict.cost_us <= budget);
            result.cost_us += verdict.cost_us;
            result.solves.push(SolveRecord {
                seed: top,
                branch: br,
                budget_us: budget,
                outcome: verdict.outcome.clone(),
                cost_us: verdict.cost_us,
            });
            match verdict.outcome {
                SolveOutcome::Solved => {
                    self.stats.mark_solved(br);
                    let bytes = verdict.input.expect("solved verdict carries input");
                    result.new_inputs.push(SolverInput { flipped: br, bytes, from_seed: top });
                }
                SolveOutcome::Failed | SolveOutcome::Timeout => {
                    self.stats.note_attempt(br);
                    if verdict.path_infeasible {
                        self.dead_pairs.insert((top, br));
                    }
                    if budget >= self.policy.upper_us {
                        self.stats.mark_unsolvable(br);
                    }
                }
            }
        }

        self.rebuild_queue(seeds, t);
        result
    }
}

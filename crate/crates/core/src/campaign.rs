//! End-to-end campaign loop under a logical clock: executes the target,
//! mutates seeds, maintains corpus and coverage, drives the energy
//! schedule, interleaves solver steps, and records events.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dmab::{
    assign_energy, base_energy, normalize, reward_expectation, unexplored_branches, SeedEntry,
    SeedOrigin,
};
use crate::graph::{compute_bb_distance, BbDistanceMap, BlockId, Branch};
use crate::osec::{
    BudgetPolicy, NullSolver, OsecEngine, PruneReason, SimulatedSolver, SolveOutcome,
    SolverInterface,
};
use crate::prob::{
    arithmetic_seed_distance, seed_distance, BranchStatsTable, ProbError, SeedDistance, TraceView,
    MICROS_PER_SEC,
};
use crate::program::TargetProgram;

/// Scheduling policy; the incremental configurations share everything but
/// the metric, the energy rule, and the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheduler {
    DistanceOnly,
    AflgoLike,
    OnlyPb,
    PbDmab,
    Hypergo,
}

impl Scheduler {
    pub fn name(&self) -> &'static str {
        match self {
            Scheduler::DistanceOnly => "distance_only",
            Scheduler::AflgoLike => "aflgo_like",
            Scheduler::OnlyPb => "only_pb",
            Scheduler::PbDmab => "pb_dmab",
            Scheduler::Hypergo => "hypergo",
        }
    }

    pub fn all() -> [Scheduler; 5] {
        [
            Scheduler::DistanceOnly,
            Scheduler::AflgoLike,
            Scheduler::OnlyPb,
            Scheduler::PbDmab,
            Scheduler::Hypergo,
        ]
    }

    fn uses_prob_metric(&self) -> bool {
        matches!(self, Scheduler::OnlyPb | Scheduler::PbDmab | Scheduler::Hypergo)
    }

    fn runs_osec(&self) -> bool {
        matches!(self, Scheduler::PbDmab | Scheduler::Hypergo)
    }
}

#[derive(Debug, Error)]
pub enum SchedulerParseError {
    #[error("unknown scheduler {0:?} (expected one of distance_only, aflgo_like, only_pb, pb_dmab, hypergo)")]
    Unknown(String),
}

impl FromStr for Scheduler {
    type Err = SchedulerParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheduler::all()
            .into_iter()
            .find(|sch| sch.name() == s)
            .ok_or_else(|| SchedulerParseError::Unknown(s.to_owned()))
    }
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub scheduler: Scheduler,
    pub rng_seed: u64,
    pub budget_us: u64,
    pub refresh_interval_us: u64,
    pub budget_policy: BudgetPolicy,
    /// One solver step per this many executions.
    pub osec_interval: u64,
    pub max_input_len: usize,
    /// Replaces the simulated solver with the null solver (ablation).
    pub null_solver: bool,
}

impl CampaignConfig {
    pub fn new(scheduler: Scheduler, rng_seed: u64, budget_s: f64) -> Self {
        CampaignConfig {
            scheduler,
            rng_seed,
            budget_us: (budget_s * MICROS_PER_SEC as f64) as u64,
            refresh_interval_us: crate::prob::DEFAULT_REFRESH_INTERVAL_US,
            budget_policy: BudgetPolicy::default(),
            osec_interval: 1000,
            max_input_len: 1024,
            null_solver: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("no initial seeds")]
    NoInitialSeeds,
    #[error("initial seed {0} failed to execute: {1}")]
    InitialSeedFailed(usize, ProbError),
    #[error("campaign budget must be representable in microseconds")]
    ClockOverflow,
    #[error(transparent)]
    Prob(#[from] ProbError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyRow {
    pub seed: u64,
    pub mutations: u64,
    pub distance: Option<f64>,
}

/// Log record payloads; one JSONL line per event.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EventData {
    #[serde(rename = "SEED_ADMITTED")]
    SeedAdmitted {
        id: u64,
        origin: SeedOrigin,
        input: String,
        trace: Vec<u32>,
        distance: Option<f64>,
        target_hit: bool,
    },
    #[serde(rename = "TARGET_REACHED")]
    TargetReached { target: u32, label: String, origin: SeedOrigin },
    #[serde(rename = "BRANCH_PRUNED")]
    BranchPruned { seed: u64, src: u32, dst: u32, reason: PruneReason },
    #[serde(rename = "SOLVE_ATTEMPT")]
    SolveAttempt {
        seed: u64,
        src: u32,
        dst: u32,
        budget_s: f64,
        outcome: SolveOutcome,
        cost_s: f64,
    },
    #[serde(rename = "ENERGY_CYCLE")]
    EnergyCycle { cycle: u64, refreshes: u64, entries: Vec<EnergyRow> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignEvent {
    pub t: f64,
    #[serde(flatten)]
    pub data: EventData,
}

pub fn events_to_jsonl(events: &[CampaignEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    out
}

pub fn events_from_jsonl(text: &str) -> Result<Vec<CampaignEvent>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct HygieneCounters {
    /// Solver calls whose destination block cannot reach any target.
    pub unreachable_solver_calls: u64,
    /// Solver calls on branches with an unsolvable ancestor on the path.
    pub unsolvable_ancestor_solver_calls: u64,
    /// Solver-produced inputs that failed to cover their flipped branch.
    pub solver_input_replay_failures: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub program: String,
    pub scheduler: String,
    pub rng_seed: u64,
    pub budget_s: f64,
    /// Per-target time-to-reach in logical seconds; `null` if never reached.
    pub ttr_s: BTreeMap<String, Option<f64>>,
    pub executions: u64,
    pub solver_calls: u64,
    pub solver_cost_s: f64,
    pub admitted: u64,
    pub rseeds: u64,
    pub prseed: f64,
    pub srseeds: u64,
    pub covered_branches: u64,
    pub final_clock_s: f64,
    pub cycles: u64,
    pub hygiene: HygieneCounters,
}

fn secs(us: u64) -> f64 {
    us as f64 / MICROS_PER_SEC as f64
}

/// `true` iff the trace covers at least one branch outside `covered`.
pub fn is_interesting(trace: &TraceView, covered: &BTreeSet<Branch>) -> bool {
    trace.branches().iter().any(|br| !covered.contains(br))
}

const INTERESTING_8: [u8; 5] = [0, 1, 0x7f, 0x80, 0xff];
const INTERESTING_16: [u16; 5] = [0, 1, 0x7fff, 0x8000, 0xffff];
const INTERESTING_32: [u32; 5] = [0, 1, 0x7fff_ffff, 0x8000_0000, 0xffff_ffff];

/// AFL-like havoc surrogate: 1-8 stacked byte-level operations,
/// deterministic for a given rng state. Output length stays within
/// `[1, min(2*len+8, max_len)]`.
pub fn mutate(input: &[u8], rng: &mut ChaCha8Rng, max_len: usize) -> Vec<u8> {
    if input.is_empty() {
        return vec![rng.gen()];
    }
    let cap = (2 * input.len() + 8).min(max_len.max(1));
    let mut out = input.to_vec();
    out.truncate(cap);
    let ops = rng.gen_range(1..=8);
    for _ in 0..ops {
        match rng.gen_range(0..8u32) {
            0 => {
                let pos = rng.gen_range(0..out.len());
                let bit = rng.gen_range(0..8);
                out[pos] ^= 1 << bit;
            }
            1 => {
                let pos = rng.gen_range(0..out.len());
                out[pos] = INTERESTING_8[rng.gen_range(0..INTERESTING_8.len())];
            }
            2 => {
                let pos = rng.gen_range(0..out.len());
                let delta = rng.gen_range(1..=35u8);
                out[pos] = if rng.gen() {
                    out[pos].wrapping_add(delta)
                } else {
                    out[pos].wrapping_sub(delta)
                };
            }
            3 => {
                if out.len() >= 2 {
                    let pos = rng.gen_range(0..=out.len() - 2);
                    let val = INTERESTING_16[rng.gen_range(0..INTERESTING_16.len())];
                    let bytes = if rng.gen() { val.to_le_bytes() } else { val.to_be_bytes() };
                    out[pos..pos + 2].copy_from_slice(&bytes);
                }
            }
            4 => {
                if out.len() >= 4 {
                    let pos = rng.gen_range(0..=out.len() - 4);
                    let val = INTERESTING_32[rng.gen_range(0..INTERESTING_32.len())];
                    let bytes = if rng.gen() { val.to_le_bytes() } else { val.to_be_bytes() };
                    out[pos..pos + 4].copy_from_slice(&bytes);
                }
            }
            5 => {
                // Duplicate a block if it fits under the cap.
                let len = rng.gen_range(1..=out.len());
                let from = rng.gen_range(0..=out.len() - len);
                let at = rng.gen_range(0..=out.len());
                if out.len() + len <= cap {
                    let seg: Vec<u8> = out[from..from + len].to_vec();
                    for (i, b) in seg.into_iter().enumerate() {
                        out.insert(at + i, b);
                    }
                }
            }
            6 => {
                if out.len() > 1 {
                    let len = rng.gen_range(1..out.len());
                    let from = rng.gen_range(0..=out.len() - len);
                    out.drain(from..from + len);
                }
            }
            _ => {
                let pos = rng.gen_range(0..out.len());
                out[pos] = rng.gen();
            }
        }
    }
    debug_assert!(!out.is_empty() && out.len() <= cap);
    out
}

struct CampaignRun<'a> {
    cfg: &'a CampaignConfig,
    prog: &'a dyn TargetProgram,
    dist: BbDistanceMap,
    stats: BranchStatsTable,
    rng: ChaCha8Rng,
    clock_us: u64,
    corpus: BTreeMap<u64, SeedEntry>,
    covered: BTreeSet<Branch>,
    ttr_us: BTreeMap<BlockId, Option<u64>>,
    events: Vec<CampaignEvent>,
    executions: u64,
    solver_calls: u64,
    solver_cost_us: u64,
    osec: OsecEngine,
    hygiene: HygieneCounters,
    next_seed_id: u64,
    refreshes: u64,
    cycles: u64,
    execs_since_osec: u64,
}

impl<'a> CampaignRun<'a> {
    fn new(cfg: &'a CampaignConfig, prog: &'a dyn TargetProgram) -> Self {
        let dist = compute_bb_distance(prog.graph());
        let stats = BranchStatsTable::new(prog.graph(), cfg.refresh_interval_us);
        let ttr_us = prog.graph().targets().iter().map(|&t| (t, None)).collect();
        CampaignRun {
            cfg,
            prog,
            dist,
            stats,
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            clock_us: 0,
            corpus: BTreeMap::new(),
            covered: BTreeSet::new(),
            ttr_us,
            events: Vec::new(),
            executions: 0,
            solver_calls: 0,
            solver_cost_us: 0,
            osec: OsecEngine::new(cfg.budget_policy),
            hygiene: HygieneCounters::default(),
            next_seed_id: 0,
            refreshes: 0,
            cycles: 0,
            execs_since_osec: 0,
        }
    }

    fn emit(&mut self, data: EventData) {
        self.events.push(CampaignEvent { t: secs(self.clock_us), data });
    }

    fn metric_distance(&self, trace: &TraceView) -> Option<SeedDistance> {
        if self.cfg.scheduler.uses_prob_metric() {
            seed_distance(&self.stats, &self.dist, trace).ok()
        } else {
            arithmetic_seed_distance(&self.dist, trace).ok()
        }
    }

    fn all_targets_reached(&self) -> bool {
        self.ttr_us.values().all(|t| t.is_some())
    }

    fn out_of_budget(&self) -> bool {
        self.clock_us >= self.cfg.budget_us
    }

    /// Executes one input: advances the clock, updates hit counters,
    /// refreshes probabilities on the logical-time interval, and records
    /// first-reach times.
    fn execute(&mut self, input: &[u8], origin: SeedOrigin) -> Result<TraceView, ProbError> {
        let trace = self.prog.execute(input);
        self.clock_us = self.clock_us.saturating_add(self.prog.exec_cost_us());
        self.executions += 1;
        self.execs_since_osec += 1;
        self.stats.record_trace(&trace)?;
        if self.stats.refresh_probabilities(self.clock_us) {
            self.refreshes += 1;
            if self.cfg.scheduler.uses_prob_metric() {
                self.recompute_distances();
            }
        }
        let on_trace: BTreeSet<BlockId> = trace.blocks().iter().copied().collect();
        let newly: Vec<BlockId> = self
            .ttr_us
            .iter()
            .filter(|(t, v)| v.is_none() && on_trace.contains(t))
            .map(|(&t, _)| t)
            .collect();
        for t in newly {
            self.ttr_us.insert(t, Some(self.clock_us));
            let label = self.prog.graph().block_name(t);
            self.emit(EventData::TargetReached { target: t.0, label, origin });
        }
        Ok(trace)
    }

    fn admit(&mut self, input: Vec<u8>, trace: TraceView, origin: SeedOrigin) {
        let id = self.next_seed_id;
        self.next_seed_id += 1;
        for br in trace.branches() {
            self.covered.insert(*br);
        }
        let distance = self.metric_distance(&trace);
        let entry = SeedEntry {
            id,
            input,
            trace,
            distance,
            unexplored: BTreeSet::new(),
            base_energy: 0.0,
            reward_expectation: 0.0,
            found_at_us: self.clock_us,
            origin,
        };
        self.emit(EventData::SeedAdmitted {
            id,
            origin,
            input: hex::encode(&entry.input),
            trace: entry.trace.blocks().iter().map(|b| b.0).collect(),
            distance: distance.map(|d| d.value),
            target_hit: distance.map(|d| d.is_target_hit).unwrap_or(false),
        });
        self.corpus.insert(id, entry);
    }

    fn refresh_corpus_state(&mut self) {
        // Unexplored sets always track global coverage; distances follow
        // the probability snapshot only for the probability-based metric.
        let ids: Vec<u64> = self.corpus.keys().copied().collect();
        for id in ids {
            let entry = self.corpus.get(&id).expect("iterating corpus ids");
            let theta = unexplored_branches(&entry.trace, &self.covered, self.prog.graph());
            let entry = self.corpus.get_mut(&id).expect("iterating corpus ids");
            entry.unexplored = theta;
        }
    }

    fn recompute_distances(&mut self) {
        let ids: Vec<u64> = self.corpus.keys().copied().collect();
        for id in ids {
            let trace = self.corpus[&id].trace.clone();
            let d = self.metric_distance(&trace);
            self.corpus.get_mut(&id).expect("iterating corpus ids").distance = d;
        }
    }

    /// Per-cycle energy assignment under the active scheduler.
    fn energy_pass(&mut self) -> Vec<EnergyRow> {
        let avg_trace_len = self.corpus.values().map(|s| s.trace.blocks().len()).sum::<usize>()
            as f64
            / self.corpus.len().max(1) as f64;
        let exec_cost_s = secs(self.prog.exec_cost_us());
        let bases: BTreeMap<u64, f64> = self
            .corpus
            .values()
            .map(|s| {
                (
                    s.id,
                    base_energy(exec_cost_s, s.trace.blocks().len(), exec_cost_s, avg_trace_len),
                )
            })
            .collect();

        let rows: Vec<EnergyRow> = match self.cfg.scheduler {
            Scheduler::DistanceOnly | Scheduler::AflgoLike | Scheduler::OnlyPb => {
                let with_d: BTreeMap<u64, f64> = self
                    .corpus
                    .values()
                    .filter_map(|s| s.distance.map(|d| (s.id, d.value)))
                    .collect();
                let norm = normalize(&with_d);
                let anneal = match self.cfg.scheduler {
                    Scheduler::AflgoLike => {
                        if self.cfg.budget_us == 0 {
                            1.0
                        } else {
                            (self.clock_us as f64 / (0.5 * self.cfg.budget_us as f64)).min(1.0)
                        }
                    }
                    _ => 1.0,
                };
                self.corpus
                    .values()
                    .map(|s| {
                        let exp = match norm.get(&s.id) {
                            Some(&dn) => anneal * (10.0 * (1.0 - dn) - 5.0),
                            None => -5.0, // no usable distance: minimum share
                        };
                        let energy = bases[&s.id] * exp.exp2();
                        EnergyRow {
                            seed: s.id,
                            mutations: (energy.ceil() as u64).max(1),
                            distance: s.distance.map(|d| d.value),
                        }
                    })
                    .collect()
            }
            Scheduler::PbDmab | Scheduler::Hypergo => {
                let mut expectations: BTreeMap<u64, f64> = BTreeMap::new();
                for s in self.corpus.values() {
                    if s.distance.is_some() && !s.unexplored.is_empty() {
                        expectations
                            .insert(s.id, reward_expectation(s.distance, &s.unexplored, &self.stats));
                    }
                }
                let norm = normalize(&expectations);
                self.corpus
                    .values()
                    .map(|s| {
                        let a = assign_energy(s.id, bases[&s.id], norm.get(&s.id).copied());
                        EnergyRow {
                            seed: s.id,
                            mutations: a.mutations,
                            distance: s.distance.map(|d| d.value),
                        }
                    })
                    .collect()
            }
        };

        for row in &rows {
            if let Some(e) = self.corpus.get_mut(&row.seed) {
                e.base_energy = bases[&row.seed];
            }
        }
        rows
    }

    fn osec_step(&mut self, solver: &dyn SolverInterface) -> Result<(), ProbError> {
        let unsolvable_before = self.osec.stats.unsolvable.clone();
        let step = self.osec.symbolic_step(&self.corpus, &self.dist, &self.stats, solver);
        for p in &step.prunes {
            self.emit(EventData::BranchPruned {
                seed: p.seed,
                src: p.branch.src.0,
                dst: p.branch.dst.0,
                reason: p.reason,
            });
        }
        for s in &step.solves {
            self.clock_us = self.clock_us.saturating_add(s.cost_us);
            self.solver_calls += 1;
            self.solver_cost_us += s.cost_us;
            if self.dist.distance(s.branch.dst).is_none() {
                self.hygiene.unreachable_solver_calls += 1;
            }
            if let Some(seed) = self.corpus.get(&s.seed) {
                let chain = seed.trace.prefix_branches(s.branch.src).unwrap_or(&[]);
                if chain.iter().any(|b| unsolvable_before.contains(b)) {
                    self.hygiene.unsolvable_ancestor_solver_calls += 1;
                }
            }
            self.emit(EventData::SolveAttempt {
                seed: s.seed,
                src: s.branch.src.0,
                dst: s.branch.dst.0,
                budget_s: secs(s.budget_us),
                outcome: s.outcome.clone(),
                cost_s: secs(s.cost_us),
            });
        }
        for ni in step.new_inputs {
            if self.out_of_budget() || self.all_targets_reached() {
                break;
            }
            let trace = self.execute(&ni.bytes, SeedOrigin::Solver)?;
            let covers = trace.branches().iter().any(|&b| b == ni.flipped);
            if !covers {
                self.hygiene.solver_input_replay_failures += 1;
            }
            if is_interesting(&trace, &self.covered) {
                self.admit(ni.bytes, trace, SeedOrigin::Solver);
            }
        }
        Ok(())
    }

    fn run(&mut self, initial: &[Vec<u8>]) -> Result<(), CampaignError> {
        if initial.is_empty() {
            return Err(CampaignError::NoInitialSeeds);
        }
        let solver: Option<Box<dyn SolverInterface + '_>> = match self.cfg.scheduler {
            Scheduler::Hypergo if !self.cfg.null_solver => {
                Some(Box::new(SimulatedSolver::new(self.prog)))
            }
            Scheduler::Hypergo | Scheduler::PbDmab => Some(Box::new(NullSolver)),
            _ => None,
        };

        for (i, bytes) in initial.iter().enumerate() {
            let trace = self
                .execute(bytes, SeedOrigin::Initial)
                .map_err(|e| CampaignError::InitialSeedFailed(i, e))?;
            self.admit(bytes.clone(), trace, SeedOrigin::Initial);
        }

        loop {
            if self.out_of_budget() || self.all_targets_reached() {
                break;
            }
            self.refresh_corpus_state();
            let rows = self.energy_pass();
            self.emit(EventData::EnergyCycle {
                cycle: self.cycles,
                refreshes: self.refreshes,
                entries: rows.clone(),
            });
            self.cycles += 1;

            'cycle: for row in &rows {
                let Some(seed_input) = self.corpus.get(&row.seed).map(|s| s.input.clone()) else {
                    continue;
                };
                for _ in 0..row.mutations {
                    if self.out_of_budget() || self.all_targets_reached() {
                        break 'cycle;
                    }
                    let child = mutate(&seed_input, &mut self.rng, self.cfg.max_input_len);
                    let trace = self.execute(&child, SeedOrigin::Fuzz)?;
                    if is_interesting(&trace, &self.covered) {
                        self.admit(child, trace, SeedOrigin::Fuzz);
                    }
                    if let Some(ref s) = solver {
                        if self.cfg.scheduler.runs_osec()
                            && self.execs_since_osec >= self.cfg.osec_interval
                        {
                            self.execs_since_osec = 0;
                            self.refresh_corpus_state();
                            self.osec_step(s.as_ref())?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn summary(&self) -> CampaignSummary {
        let admitted = self.corpus.len() as u64;
        let rseeds = self.corpus.values().filter(|s| s.distance.is_some()).count() as u64;
        let srseeds = self
            .corpus
            .values()
            .filter(|s| s.origin == SeedOrigin::Solver && s.distance.is_some())
            .count() as u64;
        let ttr_s = self
            .ttr_us
            .iter()
            .map(|(&t, &v)| (self.prog.graph().block_name(t), v.map(secs)))
            .collect();
        CampaignSummary {
            program: self.prog.name().to_owned(),
            scheduler: self.cfg.scheduler.name().to_owned(),
            rng_seed: self.cfg.rng_seed,
            budget_s: secs(self.cfg.budget_us),
            ttr_s,
            executions: self.executions,
            solver_calls: self.solver_calls,
            solver_cost_s: secs(self.solver_cost_us),
            admitted,
            rseeds,
            prseed: if admitted == 0 { 0.0 } else { rseeds as f64 / admitted as f64 },
            srseeds,
            covered_branches: self.covered.len() as u64,
            final_clock_s: secs(self.clock_us),
            cycles: self.cycles,
            hygiene: self.hygiene.clone(),
        }
    }
}

/// Runs one campaign to completion and returns the event log and summary.
pub fn run_campaign(
    cfg: &CampaignConfig,
    prog: &dyn TargetProgram,
    initial: &[Vec<u8>],
) -> Result<(Vec<CampaignEvent>, CampaignSummary), CampaignError> {
    let mut run = CampaignRun::new(cfg, prog);
    run.run(initial)?;
    let summary = run.summary();
    Ok((run.events, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn scheduler_names_roundtrip() {
        for s in Scheduler::all() {
            assert_eq!(s.name().parse::<Scheduler>().unwrap(), s);
        }
        assert!("foo".parse::<Scheduler>().is_err());
    }

    #[test]
    fn mutate_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        let x = mutate(&[0, 0, 0, 0], &mut a, 1024);
        let y = mutate(&[0, 0, 0, 0], &mut b, 1024);
        assert_eq!(x, y);
    }

    #[test]
    fn mutate_empty_input_gives_one_byte() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(mutate(&[], &mut rng, 1024).len(), 1);
    }

    #[test]
    fn mutate_length_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for len in [1usize, 3, 9, 40] {
            let input = vec![0xAAu8; len];
            for _ in 0..500 {
                let out = mutate(&input, &mut rng, 4096);
                assert!(!out.is_empty());
                assert!(out.len() <= 2 * len + 8, "len {} out {}", len, out.len());
            }
        }
    }

    #[test]
    fn interesting_is_new_branch() {
        let prog = fixtures::fig1();
        let trace = prog.execute(&[0x00, 0x40, 0x40, 0x40, 0x00]);
        let mut covered = BTreeSet::new();
        assert!(is_interesting(&trace, &covered));
        for br in trace.branches() {
            covered.insert(*br);
        }
        assert!(!is_interesting(&trace, &covered));
    }

    #[test]
    fn zero_budget_stops_after_initial_admission() {
        let prog = fixtures::fig1();
        let cfg = CampaignConfig::new(Scheduler::Hypergo, 1, 0.0);
        let (events, summary) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
        assert_eq!(summary.admitted, 2);
        assert!(events
            .iter()
            .all(|e| matches!(e.data, EventData::SeedAdmitted { .. })));
        assert!(summary.ttr_s.values().all(|t| t.is_none()));
    }

    #[test]
    fn entry_target_reached_at_first_execution() {
        let doc = serde_json::json!({
            "name": "entry_target",
            "entry": 0,
            "targets": [0],
            "blocks": [{"id": 0, "func": "main"}],
            "branches": [],
            "seeds": [[0]]
        })
        .to_string();
        let prog = crate::program::PredicateProgram::from_json(&doc).unwrap();
        let cfg = CampaignConfig::new(Scheduler::DistanceOnly, 3, 0.0);
        let (_, summary) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
        let ttr = summary.ttr_s["b0"].unwrap();
        assert!((ttr - 0.001).abs() < 1e-12);
    }

    #[test]
    fn determinism_same_seed_same_events() {
        let prog = fixtures::fig1();
        let mut cfg = CampaignConfig::new(Scheduler::Hypergo, 99, 5.0);
        cfg.refresh_interval_us = MICROS_PER_SEC;
        let (e1, _) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
        let (e2, _) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
        assert_eq!(events_to_jsonl(&e1), events_to_jsonl(&e2));
    }

    #[test]
    fn clock_conservation() {
        let prog = fixtures::fig1();
        let mut cfg = CampaignConfig::new(Scheduler::Hypergo, 5, 8.0);
        cfg.refresh_interval_us = MICROS_PER_SEC;
        let (_, summary) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
        let expect = summary.executions as f64 * 0.001 + summary.solver_cost_s;
        assert!(
            (summary.final_clock_s - expect).abs() < 1e-6,
            "clock {} vs {}",
            summary.final_clock_s,
            expect
        );
    }

    #[test]
    fn coverage_and_ttr_monotone_in_event_log() {
        let prog = fixtures::fig1();
        let mut cfg = CampaignConfig::new(Scheduler::Hypergo, 11, 10.0);
        cfg.refresh_interval_us = MICROS_PER_SEC;
        let (events, _) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
        let mut last_t = 0.0;
        for e in &events {
            assert!(e.t >= last_t, "event times must be non-decreasing");
            last_t = e.t;
        }
    }
}

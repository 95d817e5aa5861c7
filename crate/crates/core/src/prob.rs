//! Branch hit statistics, branch/path probabilities, and the probability-
//! based distance metric derived from them.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{BbDistanceMap, BlockId, Branch, ProgramGraph};

pub const MICROS_PER_SEC: u64 = 1_000_000;
/// Probabilities are rebuilt from hit counters at most once per interval.
pub const DEFAULT_REFRESH_INTERVAL_US: u64 = 60 * MICROS_PER_SEC;

#[derive(Debug, Error, PartialEq)]
pub enum ProbError {
    #[error("unknown branch {0}")]
    UnknownBranch(Branch),
    #[error("block {0} does not occur on the trace")]
    NotOnTrace(BlockId),
    #[error("no trace block has a finite distance")]
    NoDistance,
    #[error("trace is empty")]
    EmptyTrace,
    #[error("trace step {0}->{1} is not a graph branch")]
    InvalidStep(BlockId, BlockId),
}

/// One execution path: the block sequence from the entry block plus the
/// branches between consecutive blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceView {
    blocks: Vec<BlockId>,
    branches: Vec<Branch>,
}

impl TraceView {
    /// Validates that consecutive blocks are connected in `g`.
    pub fn from_blocks(g: &ProgramGraph, blocks: Vec<BlockId>) -> Result<Self, ProbError> {
        if blocks.is_empty() {
            return Err(ProbError::EmptyTrace);
        }
        let mut branches = Vec::with_capacity(blocks.len().saturating_sub(1));
        for w in blocks.windows(2) {
            let br = Branch { src: w[0], dst: w[1] };
            if !g.contains_branch(br) {
                return Err(ProbError::InvalidStep(w[0], w[1]));
            }
            branches.push(br);
        }
        Ok(TraceView { blocks, branches })
    }

    pub fn blocks(&self) -> &[BlockId] {
        &self.blocks
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Distinct blocks in first-occurrence order.
    pub fn dedup_blocks(&self) -> Vec<BlockId> {
        let mut seen = std::collections::HashSet::new();
        self.blocks.iter().copied().filter(|b| seen.insert(*b)).collect()
    }

    /// Branch prefix up to the first occurrence of `m`.
    pub fn prefix_branches(&self, m: BlockId) -> Result<&[Branch], ProbError> {
        match self.blocks.iter().position(|&b| b == m) {
            Some(i) => Ok(&self.branches[..i]),
            None => Err(ProbError::NotOnTrace(m)),
        }
    }
}

/// Per-branch hit counters plus the probability snapshot derived from them
/// at the last refresh. Uncovered branches contribute a virtual hit of 1,
/// so every probability stays strictly positive.
#[derive(Debug, Clone)]
pub struct BranchStatsTable {
    hits: HashMap<Branch, u64>,
    prob: HashMap<Branch, f64>,
    groups: Vec<Vec<Branch>>,
    refresh_interval_us: u64,
    last_refresh_us: u64,
    refresh_count: u64,
}

impl BranchStatsTable {
    pub fn new(g: &ProgramGraph, refresh_interval_us: u64) -> Self {
        let groups: Vec<Vec<Branch>> = crate::graph::sibling_groups(g)
            .into_iter()
            .map(|grp| grp.members)
            .collect();
        let hits = g.branches().iter().map(|&br| (br, 0u64)).collect();
        let mut table = BranchStatsTable {
            hits,
            prob: HashMap::new(),
            groups,
            refresh_interval_us,
            last_refresh_us: 0,
            refresh_count: 0,
        };
        table.recompute();
        table
    }

    fn recompute(&mut self) {
        for group in &self.groups {
            let total: f64 = group
                .iter()
                .map(|br| self.hits[br].max(1) as f64)
                .sum();
            for br in group {
                let h = self.hits[br].max(1) as f64;
                self.prob.insert(*br, h / total);
            }
        }
    }

    /// Counts every traversal occurrence on the trace. Probabilities are
    /// untouched until the next refresh.
    pub fn record_trace(&mut self, trace: &TraceView) -> Result<(), ProbError> {
        for br in trace.branches() {
            if !self.hits.contains_key(br) {
                return Err(ProbError::UnknownBranch(*br));
            }
        }
        for br in trace.branches() {
            let h = self.hits.get_mut(br).expect("validated above");
            *h = h.saturating_add(1);
        }
        Ok(())
    }

    /// Rebuilds the probability snapshot if at least one refresh interval
    /// has elapsed since the last one. Returns whether a refresh ran.
    pub fn refresh_probabilities(&mut self, now_us: u64) -> bool {
        debug_assert!(now_us >= self.last_refresh_us);
        if now_us.saturating_sub(self.last_refresh_us) < self.refresh_interval_us {
            return false;
        }
        self.recompute();
        self.last_refresh_us = now_us;
        self.refresh_count += 1;
        true
    }

    pub fn prob(&self, br: Branch) -> Option<f64> {
        self.prob.get(&br).copied()
    }

    pub fn hits(&self, br: Branch) -> Option<u64> {
        self.hits.get(&br).copied()
    }

    pub fn refresh_count(&self) -> u64 {
        self.refresh_count
    }

    pub fn last_refresh_us(&self) -> u64 {
        self.last_refresh_us
    }

    /// Overrides a hit counter directly. Intended for tests and fixtures.
    pub fn set_hits(&mut self, br: Branch, hits: u64) -> Result<(), ProbError> {
        match self.hits.get_mut(&br) {
            Some(h) => {
                *h = hits;
                Ok(())
            }
            None => Err(ProbError::UnknownBranch(br)),
        }
    }
}

/// Product of branch probabilities along the prefix of the first occurrence
/// of `m` on the trace. The entry block yields 1 (empty product).
pub fn path_probability(
    t: &BranchStatsTable,
    trace: &TraceView,
    m: BlockId,
) -> Result<f64, ProbError> {
    let prefix = trace.prefix_branches(m)?;
    let mut p = 1.0;
    for br in prefix {
        p *= t.prob(*br).ok_or(ProbError::UnknownBranch(*br))?;
    }
    Ok(p)
}

/// Scales a block distance by `e^(-p)`, bounding the result to
/// `[d_b / e, d_b)` for `p` in `(0, 1]`.
pub fn probability_based_distance(d_b: f64, p_path: f64) -> f64 {
    d_b * (-p_path).exp()
}

/// Seed distance outcome. A zero distance means the trace contains a
/// target block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedDistance {
    pub value: f64,
    pub is_target_hit: bool,
}

impl SeedDistance {
    pub fn target_hit() -> Self {
        SeedDistance { value: 0.0, is_target_hit: true }
    }
}

/// Log-sum form of the geometric-mean seed distance over distinct trace
/// blocks. `parts` pairs each counted block's distance with its path
/// probability; blocks without a finite distance must already be filtered
/// out.
pub fn seed_distance_from_parts(parts: &[(f64, f64)]) -> Result<SeedDistance, ProbError> {
    if parts.is_empty() {
        return Err(ProbError::NoDistance);
    }
    if parts.iter().any(|&(d_b, _)| d_b == 0.0) {
        return Ok(SeedDistance::target_hit());
    }
    let sum: f64 = parts.iter().map(|&(d_b, p)| d_b.ln() - p).sum();
    Ok(SeedDistance { value: (sum / parts.len() as f64).exp(), is_target_hit: false })
}

/// Geometric-mean seed distance of a trace. Blocks with no finite distance
/// are excluded from the mean; a whole-trace exclusion is the distinct
/// `NoDistance` outcome.
pub fn seed_distance(
    t: &BranchStatsTable,
    d: &BbDistanceMap,
    trace: &TraceView,
) -> Result<SeedDistance, ProbError> {
    if trace.blocks().is_empty() {
        return Err(ProbError::EmptyTrace);
    }
    let mut parts = Vec::new();
    for m in trace.dedup_blocks() {
        if let Some(d_b) = d.distance(m) {
            let p = path_probability(t, trace, m)?;
            parts.push((d_b, p));
        }
    }
    seed_distance_from_parts(&parts)
}

/// Arithmetic-mean seed distance over distinct blocks with finite
/// distances; the static baseline metric.
pub fn arithmetic_seed_distance(
    d: &BbDistanceMap,
    trace: &TraceView,
) -> Result<SeedDistance, ProbError> {
    if trace.blocks().is_empty() {
        return Err(ProbError::EmptyTrace);
    }
    let dists: Vec<f64> =
        trace.dedup_blocks().iter().filter_map(|&m| d.distance(m)).collect();
    if dists.is_empty() {
        return Err(ProbError::NoDistance);
    }
    if dists.iter().any(|&x| x == 0.0) {
        return Ok(SeedDistance::target_hit());
    }
    let mean = dists.iter().sum::<f64>() / dists.len() as f64;
    Ok(SeedDistance { value: mean, is_target_hit: false })
}

//! Directed-fuzzing scheduling engine and deterministic campaign
//! simulator: probability-based seed distances, a bandit power schedule,
//! solver-queue prioritization with branch pruning, and synthetic target
//! programs to exercise them against.

pub mod campaign;
pub mod dmab;
pub mod fixtures;
pub mod graph;
pub mod osec;
pub mod predicate;
pub mod prob;
pub mod program;

pub use campaign::{
    is_interesting, mutate, run_campaign, CampaignConfig, CampaignError, CampaignEvent,
    CampaignSummary, EventData, Scheduler,
};
pub use graph::{
    compute_bb_distance, is_reachable, load_graph, sibling_groups, BbDistanceMap, BlockId, Branch,
    GraphError, ProgramGraph, SiblingGroup,
};
pub use prob::{
    arithmetic_seed_distance, path_probability, probability_based_distance, seed_distance,
    BranchStatsTable, ProbError, SeedDistance, TraceView,
};
pub use program::{PredicateProgram, ProgramError, SolveAnnotation, TargetProgram};

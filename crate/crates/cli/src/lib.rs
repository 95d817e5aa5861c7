//! Library surface of the campaign CLI: statistics and report generation.

pub mod report;
pub mod stats;

//! Run-matrix execution and CSV reporting for A/B comparisons.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dgfsim::campaign::{run_campaign, CampaignConfig, Scheduler};
use dgfsim::program::TargetProgram;

use crate::stats::{mann_whitney_u, mean, median, vargha_delaney_a12};

/// Runs not reaching a target within the budget enter medians, speedups,
/// p-values and effect sizes as this multiple of the budget.
pub const TIMEOUT_FACTOR: f64 = 1.25;

#[derive(Debug, Clone)]
pub struct RunMatrix {
    pub programs: Vec<String>,
    pub schedulers: Vec<Scheduler>,
    pub repetitions: u64,
    pub budget_s: f64,
    pub base_rng_seed: u64,
}

/// One (fixture, target, scheduler, repetition) outcome.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub fixture: String,
    pub target: String,
    pub scheduler: String,
    pub rep: u64,
    pub rng_seed: u64,
    pub ttr_s: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StatRow {
    pub fixture: String,
    pub target: String,
    pub baseline: String,
    pub scheduler: String,
    pub median_baseline_s: f64,
    pub median_s: f64,
    pub mean_baseline_s: f64,
    pub mean_s: f64,
    pub speedup_median: f64,
    pub speedup_mean: f64,
    pub p_value: f64,
    pub a12: f64,
}

/// Loads a program by builtin name or JSON document path.
pub fn load_program(name_or_path: &str) -> Result<Box<dyn TargetProgram>> {
    if let Some(p) = dgfsim::fixtures::builtin(name_or_path) {
        return Ok(p);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        bail!("program {name_or_path:?} is neither a builtin fixture nor a file");
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let prog = dgfsim::program::PredicateProgram::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(Box::new(prog))
}

/// Executes the full matrix; repetition i of every (program, scheduler)
/// cell uses rng seed base + i.
pub fn run_matrix(matrix: &RunMatrix) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    for prog_name in &matrix.programs {
        let prog = load_program(prog_name)?;
        let seeds = prog.initial_seeds();
        for &sched in &matrix.schedulers {
            for rep in 0..matrix.repetitions {
                let rng_seed = matrix.base_rng_seed + rep;
                let cfg = CampaignConfig::new(sched, rng_seed, matrix.budget_s);
                let (_, summary) = run_campaign(&cfg, prog.as_ref(), &seeds)
                    .with_context(|| format!("running {prog_name} with {}", sched.name()))?;
                for (target, ttr) in &summary.ttr_s {
                    records.push(RunRecord {
                        fixture: prog_name.clone(),
                        target: target.clone(),
                        scheduler: sched.name().to_owned(),
                        rep,
                        rng_seed,
                        ttr_s: *ttr,
                    });
                }
            }
        }
    }
    records.sort_by(|a, b| {
        (&a.fixture, &a.target, &a.scheduler, a.rep).cmp(&(
            &b.fixture,
            &b.target,
            &b.scheduler,
            b.rep,
        ))
    });
    Ok(records)
}

pub fn write_ttr_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["fixture", "target", "scheduler", "rep", "rng_seed", "ttr_s"])?;
    for r in records {
        w.write_record([
            r.fixture.as_str(),
            r.target.as_str(),
            r.scheduler.as_str(),
            &r.rep.to_string(),
            &r.rng_seed.to_string(),
            &r.ttr_s.map(|t| t.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ttr_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        out.push(RunRecord {
            fixture: row[0].to_owned(),
            target: row[1].to_owned(),
            scheduler: row[2].to_owned(),
            rep: row[3].parse()?,
            rng_seed: row[4].parse()?,
            ttr_s: if row[5].is_empty() { None } else { Some(row[5].parse()?) },
        });
    }
    Ok(out)
}

/// Aggregates per (fixture, target): each non-baseline scheduler against
/// the first-listed one, with timeout substitution applied.
pub fn compute_stats(
    records: &[RunRecord],
    schedulers: &[Scheduler],
    budget_s: f64,
) -> Result<Vec<StatRow>> {
    if schedulers.len() < 2 {
        bail!("need >=2 schedulers to compare");
    }
    let substituted = |r: &RunRecord| r.ttr_s.unwrap_or(TIMEOUT_FACTOR * budget_s);
    let mut groups: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.fixture.clone(), r.target.clone(), r.scheduler.clone()))
            .or_default()
            .push(substituted(r));
    }
    let baseline = schedulers[0].name();
    let mut rows = Vec::new();
    let keys: Vec<(String, String)> = {
        let mut k: Vec<(String, String)> = groups
            .keys()
            .map(|(f, t, _)| (f.clone(), t.clone()))
            .collect();
        k.dedup();
        k
    };
    for (fixture, target) in keys {
        let base = groups
            .get(&(fixture.clone(), target.clone(), baseline.to_owned()))
            .context("baseline scheduler missing from records")?;
        for sched in &schedulers[1..] {
            let treat = groups
                .get(&(fixture.clone(), target.clone(), sched.name().to_owned()))
                .context("scheduler missing from records")?;
            rows.push(StatRow {
                fixture: fixture.clone(),
                target: target.clone(),
                baseline: baseline.to_owned(),
                scheduler: sched.name().to_owned(),
                median_baseline_s: median(base),
                median_s: median(treat),
                mean_baseline_s: mean(base),
                mean_s: mean(treat),
                speedup_median: median(base) / median(treat),
                speedup_mean: mean(base) / mean(treat),
                p_value: mann_whitney_u(base, treat)?,
                a12: vargha_delaney_a12(base, treat)?,
            });
        }
    }
    rows.sort_by(|a, b| {
        (&a.fixture, &a.target, &a.scheduler).cmp(&(&b.fixture, &b.target, &b.scheduler))
    });
    Ok(rows)
}

pub fn write_stats_csv(rows: &[StatRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "fixture",
        "target",
        "baseline",
        "scheduler",
        "median_baseline_s",
        "median_s",
        "mean_baseline_s",
        "mean_s",
        "speedup_median",
        "speedup_mean",
        "p_value",
        "a12",
    ])?;
    for r in rows {
        w.write_record([
            r.fixture.as_str(),
            r.target.as_str(),
            r.baseline.as_str(),
            r.scheduler.as_str(),
            &r.median_baseline_s.to_string(),
            &r.median_s.to_string(),
            &r.mean_baseline_s.to_string(),
            &r.mean_s.to_string(),
            &r.speedup_median.to_string(),
            &r.speedup_mean.to_string(),
            &r.p_value.to_string(),
            &r.a12.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

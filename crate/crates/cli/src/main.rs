use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dgfsim::campaign::{
    events_from_jsonl, events_to_jsonl, run_campaign, CampaignConfig, EventData, Scheduler,
};
use dgfsim::graph::{compute_bb_distance, sibling_groups, BlockId};
use dgfsim_cli::report::{
    compute_stats, load_program, run_matrix, write_stats_csv, write_ttr_csv, RunMatrix,
};

#[derive(Parser)]
#[command(name = "dgfsim", about = "Directed-fuzzing campaign simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one campaign and write events.jsonl plus summary.json.
    Run {
        /// Builtin fixture name (fig1, fig3, parser, random:<n>:<seed>:<h>)
        /// or path to a program document.
        #[arg(long)]
        program: String,
        #[arg(long)]
        scheduler: String,
        /// Logical-time budget in seconds.
        #[arg(long)]
        budget: f64,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Probability refresh interval in logical seconds.
        #[arg(long, default_value_t = 60.0)]
        refresh_interval: f64,
        /// Fuzz executions per solver step.
        #[arg(long, default_value_t = 1000)]
        osec_k: u64,
        /// Replace the simulated solver with the null solver.
        #[arg(long, default_value_t = false)]
        null_solver: bool,
    },
    /// Run a scheduler comparison matrix and write ttr.csv plus stats.csv.
    Compare {
        #[arg(long = "program", required = true)]
        programs: Vec<String>,
        #[arg(long = "scheduler", required = true)]
        schedulers: Vec<String>,
        #[arg(long, default_value_t = 5)]
        reps: u64,
        #[arg(long)]
        budget: f64,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print per-block distances and sibling-group sizes as CSV.
    Analyze {
        #[arg(long)]
        program: String,
    },
    /// Re-execute the admitted seeds of an event log and verify traces.
    Replay {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        program: String,
    },
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    program: &str,
    scheduler: &str,
    budget: f64,
    rng_seed: u64,
    out: &PathBuf,
    refresh_interval: f64,
    osec_k: u64,
    null_solver: bool,
) -> Result<()> {
    let sched: Scheduler = scheduler.parse().map_err(anyhow::Error::msg)?;
    let prog = load_program(program)?;
    let mut cfg = CampaignConfig::new(sched, rng_seed, budget);
    cfg.refresh_interval_us = (refresh_interval * 1e6) as u64;
    cfg.osec_interval = osec_k.max(1);
    cfg.null_solver = null_solver;
    let (events, summary) = run_campaign(&cfg, prog.as_ref(), &prog.initial_seeds())?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("events.jsonl"), events_to_jsonl(&events))?;
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    for (target, ttr) in &summary.ttr_s {
        match ttr {
            Some(t) => println!("target {target}: reached at {t:.3}s"),
            None => println!("target {target}: not reached"),
        }
    }
    Ok(())
}

fn cmd_compare(
    programs: &[String],
    schedulers: &[String],
    reps: u64,
    budget: f64,
    rng_seed: u64,
    out: &PathBuf,
) -> Result<()> {
    if schedulers.len() < 2 {
        anyhow::bail!("need >=2 schedulers to compare");
    }
    if reps < 1 {
        anyhow::bail!("need >=1 repetition");
    }
    let parsed: Vec<Scheduler> = schedulers
        .iter()
        .map(|s| s.parse::<Scheduler>().map_err(anyhow::Error::msg))
        .collect::<Result<_>>()?;
    let matrix = RunMatrix {
        programs: programs.to_vec(),
        schedulers: parsed.clone(),
        repetitions: reps,
        budget_s: budget,
        base_rng_seed: rng_seed,
    };
    let records = run_matrix(&matrix)?;
    let rows = compute_stats(&records, &parsed, budget)?;
    std::fs::create_dir_all(out)?;
    write_ttr_csv(&records, &out.join("ttr.csv"))?;
    write_stats_csv(&rows, &out.join("stats.csv"))?;
    for r in &rows {
        println!(
            "{}/{}: {} vs {}: median {:.3}s vs {:.3}s (speedup {:.2}x, p={:.4}, A12={:.3})",
            r.fixture,
            r.target,
            r.baseline,
            r.scheduler,
            r.median_baseline_s,
            r.median_s,
            r.speedup_median,
            r.p_value,
            r.a12
        );
    }
    Ok(())
}

fn cmd_analyze(program: &str) -> Result<()> {
    let prog = load_program(program)?;
    let g = prog.graph();
    let dist = compute_bb_distance(g);
    println!("block,distance");
    for b in g.blocks() {
        let d = match dist.distance(b) {
            Some(v) => format!("{v}"),
            None => "UNREACHABLE".to_owned(),
        };
        println!("{},{}", g.block_name(b), d);
    }
    println!("group_src,branches");
    for grp in sibling_groups(g) {
        println!("{},{}", g.block_name(grp.src), grp.members.len());
    }
    Ok(())
}

fn cmd_replay(events_path: &PathBuf, program: &str) -> Result<ExitCode> {
    let prog = load_program(program)?;
    let text = std::fs::read_to_string(events_path)
        .with_context(|| format!("reading {}", events_path.display()))?;
    let events = events_from_jsonl(&text)?;
    let mut checked = 0u64;
    let mut mismatched = 0u64;
    for e in &events {
        if let EventData::SeedAdmitted { input, trace, .. } = &e.data {
            let bytes = hex_decode(input).context("decoding admitted input")?;
            let got: Vec<u32> = prog
                .execute(&bytes)
                .blocks()
                .iter()
                .map(|b: &BlockId| b.0)
                .collect();
            checked += 1;
            if &got != trace {
                mismatched += 1;
                eprintln!("seed trace mismatch for input {input}");
            }
        }
    }
    println!("replayed {checked} admitted seeds, {mismatched} mismatches");
    Ok(if mismatched == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn hex_decode(s: &str) -> Result<Vec<u8>> {
    if s.len() % 2 != 0 {
        anyhow::bail!("odd-length hex string");
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).map_err(Into::into))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<ExitCode> = match &cli.command {
        Command::Run {
            program,
            scheduler,
            budget,
            rng_seed,
            out,
            refresh_interval,
            osec_k,
            null_solver,
        } => cmd_run(
            program,
            scheduler,
            *budget,
            *rng_seed,
            out,
            *refresh_interval,
            *osec_k,
            *null_solver,
        )
        .map(|_| ExitCode::SUCCESS),
        Command::Compare { programs, schedulers, reps, budget, rng_seed, out } => {
            cmd_compare(programs, schedulers, *reps, *budget, *rng_seed, out)
                .map(|_| ExitCode::SUCCESS)
        }
        Command::Analyze { program } => cmd_analyze(program).map(|_| ExitCode::SUCCESS),
        Command::Replay { events, program } => cmd_replay(events, program),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

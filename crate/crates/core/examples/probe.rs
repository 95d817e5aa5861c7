use dgfsim::campaign::{run_campaign, CampaignConfig, EventData, Scheduler};
use dgfsim::fixtures;
use dgfsim::graph::compute_bb_distance;
use dgfsim::prob::{seed_distance, BranchStatsTable};
use dgfsim::program::TargetProgram;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn main() {
    let prog = fixtures::fig1();
    let budget = 120.0;
    let mut ttrs: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
    let mut first_cycle_ok = 0;

    for rng_seed in 0..20u64 {
        for sched in [Scheduler::DistanceOnly, Scheduler::Hypergo] {
            let mut cfg = CampaignConfig::new(sched, rng_seed, budget);
            cfg.refresh_interval_us = 1_000_000;
            cfg.osec_interval = 250;
            let (events, summary) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
            let ttr = summary.ttr_s["T"].unwrap_or(1.25 * budget);
            ttrs.entry(sched.name()).or_default().push(ttr);
            if sched == Scheduler::DistanceOnly {
                for e in &events {
                    if let EventData::EnergyCycle { entries, .. } = &e.data {
                        let m0 = entries.iter().find(|r| r.seed == 0).map(|r| r.mutations);
                        let m1 = entries.iter().find(|r| r.seed == 1).map(|r| r.mutations);
                        if m1 > m0 {
                            first_cycle_ok += 1;
                        }
                        break;
                    }
                }
            }
        }
    }
    for (k, v) in &ttrs {
        println!(
            "{k}: median {:.3}s  min {:.3} max {:.3}",
            median(v.clone()),
            v.iter().cloned().fold(f64::INFINITY, f64::min),
            v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
    }
    println!("distance_only first-cycle seed1>seed0 energy: {first_cycle_ok}/20");

    // Random-sampling regime (theoretical-probability convergence): record
    // uniform inputs, refresh once, ask the metric.
    let dist = compute_bb_distance(prog.graph());
    let mut stats = BranchStatsTable::new(prog.graph(), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1C5);
    for _ in 0..10_000 {
        let input: Vec<u8> = (0..7).map(|_| rng.gen::<u8>()).collect();
        stats.record_trace(&prog.execute(&input)).unwrap();
    }
    stats.refresh_probabilities(1);
    let seeds = prog.initial_seeds();
    let d0 = seed_distance(&stats, &dist, &prog.execute(&seeds[0])).unwrap();
    let d1 = seed_distance(&stats, &dist, &prog.execute(&seeds[1])).unwrap();
    println!("uniform-sampled metric: d_s(trace1)={:.4} d_s(trace2)={:.4} flip={}", d0.value, d1.value, d0.value < d1.value);
}

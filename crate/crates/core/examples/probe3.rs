use dgfsim::campaign::{run_campaign, CampaignConfig, EventData, Scheduler};
use dgfsim::fixtures;
use dgfsim::program::TargetProgram;

fn main() {
    let prog = fixtures::fig1();
    for rng_seed in 0..8u64 {
        let cfg = CampaignConfig::new(Scheduler::DistanceOnly, rng_seed, 120.0);
        let (events, summary) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
        let ttr = summary.ttr_s["T"];
        let hit = events.iter().find_map(|e| match &e.data {
            EventData::SeedAdmitted { input, target_hit: true, .. } => Some(input.clone()),
            _ => None,
        });
        println!(
            "seed {rng_seed}: ttr {:?} execs {} admitted {} hit-input {:?}",
            ttr, summary.executions, summary.admitted, hit
        );
    }
}

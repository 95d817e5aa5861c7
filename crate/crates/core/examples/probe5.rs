use dgfsim::campaign::{run_campaign, CampaignConfig, Scheduler};
use dgfsim::fixtures::random_cfg;
use dgfsim::program::TargetProgram;
use std::time::Instant;

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
    let budget = 30.0;
    let scheds = [
        Scheduler::DistanceOnly,
        Scheduler::OnlyPb,
        Scheduler::PbDmab,
        Scheduler::Hypergo,
    ];
    let t0 = Instant::now();
    for gen_seed in 9..=28u64 {
        let prog = random_cfg(60, gen_seed, 0.6);
        let mut meds = Vec::new();
        for sched in scheds {
            let mut ttrs = Vec::new();
            for rng_seed in 0..10u64 {
                let cfg = CampaignConfig::new(sched, rng_seed, budget);
                let (_, summary) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
                ttrs.push(summary.ttr_s["t"].unwrap_or(1.25 * budget));
            }
            meds.push(median(ttrs));
        }
        let interesting = meds[0] > 0.5 && meds.iter().any(|&m| m < 1.25 * budget);
        if interesting {
            println!(
                "gen {gen_seed:2}: d_o={:7.3} o_pb={:7.3} pbd={:7.3} hyp={:7.3}  chain={}",
                meds[0],
                meds[1],
                meds[2],
                meds[3],
                meds[0] >= meds[1] && meds[1] >= meds[2] && meds[2] >= meds[3]
            );
        }
    }
    println!("scan wall: {:.1}s", t0.elapsed().as_secs_f64());
}

use dgfsim::campaign::{events_to_jsonl, run_campaign, CampaignConfig, Scheduler};
use dgfsim::fixtures::random_cfg;
use dgfsim::program::TargetProgram;

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
    let budget = 40.0;
    let scheds = [
        Scheduler::DistanceOnly,
        Scheduler::OnlyPb,
        Scheduler::PbDmab,
        Scheduler::Hypergo,
    ];
    for gen_seed in 1..=8u64 {
        let prog = random_cfg(60, gen_seed, 0.6);
        let doc = prog.to_json();
        let magic = doc.matches("\"solvable\":true").count()
            + doc.matches("\"solvable\": true").count();
        let mut meds = Vec::new();
        for sched in scheds {
            let mut ttrs = Vec::new();
            for rng_seed in 0..20u64 {
                let cfg = CampaignConfig::new(sched, rng_seed, budget);
                let (_, summary) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
                let ttr = summary.ttr_s["t"].unwrap_or(1.25 * budget);
                ttrs.push(ttr);
            }
            meds.push(median(ttrs));
        }
        let chain = meds[0] >= meds[1] && meds[1] >= meds[2] && meds[2] >= meds[3];
        println!(
            "gen {gen_seed}: magic_branches={magic:2}  medians d_o={:7.3} o_pb={:7.3} pbd={:7.3} hyp={:7.3}  chain={}",
            meds[0], meds[1], meds[2], meds[3], chain
        );
    }

    // Identity: hypergo with NullSolver vs pb_dmab, plus both on hardness 0.
    let prog = random_cfg(60, 3, 0.6);
    let mut ok = true;
    for rng_seed in 0..5u64 {
        let mut cfg_h = CampaignConfig::new(Scheduler::Hypergo, rng_seed, 20.0);
        cfg_h.null_solver = true;
        let cfg_p = CampaignConfig::new(Scheduler::PbDmab, rng_seed, 20.0);
        let (e1, _) = run_campaign(&cfg_h, &prog, &prog.initial_seeds()).unwrap();
        let (e2, _) = run_campaign(&cfg_p, &prog, &prog.initial_seeds()).unwrap();
        ok &= events_to_jsonl(&e1) == events_to_jsonl(&e2);
    }
    println!("null-solver identity: {ok}");
    let prog0 = random_cfg(60, 3, 0.0);
    let mut ok0 = true;
    for rng_seed in 0..5u64 {
        let cfg_h = CampaignConfig::new(Scheduler::Hypergo, rng_seed, 20.0);
        let cfg_p = CampaignConfig::new(Scheduler::PbDmab, rng_seed, 20.0);
        let (e1, _) = run_campaign(&cfg_h, &prog0, &prog0.initial_seeds()).unwrap();
        let (e2, _) = run_campaign(&cfg_p, &prog0, &prog0.initial_seeds()).unwrap();
        ok0 &= events_to_jsonl(&e1) == events_to_jsonl(&e2);
    }
    println!("hardness-0 hypergo==pb_dmab: {ok0}");
}

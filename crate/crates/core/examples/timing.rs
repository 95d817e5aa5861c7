use dgfsim::campaign::{run_campaign, CampaignConfig, Scheduler};
use dgfsim::fixtures::random_cfg;
use dgfsim::program::TargetProgram;
use std::time::Instant;
fn main() {
    let prog = random_cfg(60, 1, 0.6);
    let t = Instant::now();
    let cfg = CampaignConfig::new(Scheduler::DistanceOnly, 0, 30.0);
    let (_, s) = run_campaign(&cfg, &prog, &prog.initial_seeds()).unwrap();
    println!("debug: {} execs in {:.2}s wall", s.executions, t.elapsed().as_secs_f64());
    let prog2 = dgfsim::fixtures::fig1();
    let t2 = Instant::now();
    let cfg2 = CampaignConfig::new(Scheduler::DistanceOnly, 7, 120.0);
    let (_, s2) = run_campaign(&cfg2, &prog2, &prog2.initial_seeds()).unwrap();
    println!("fig1 debug: {} execs in {:.2}s wall", s2.executions, t2.elapsed().as_secs_f64());
}

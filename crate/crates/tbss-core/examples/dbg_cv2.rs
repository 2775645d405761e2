use tbss_core::eval::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let rep_seed = replicate_seed(777, 21);
    let (series, spec, _) = generate_scenario("E.1", rep_seed).unwrap();
    let config = scenario_detect_config(&spec, rep_seed, &BenchmarkConfig::default());
    std::env::set_var("TBSS_DUMP_CV", "1");
    let tuned = tune_lambdas(&series, spec.q, &config.tuning).unwrap();
    println!("winner: l1 {:.5} l2 {:.6} mspe {:.6}", tuned.lambda1, tuned.lambda2, tuned.mspe);
}

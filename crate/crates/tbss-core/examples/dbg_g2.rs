use tbss_core::eval::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let rep_seed = replicate_seed(seed, 0);
    let (series, spec, _) = generate_scenario("G.1", rep_seed).unwrap();
    let mut tuning = TuningConfig::new(mix_seed(rep_seed, 0xDE7EC7));
    tuning.b_t = Some(spec.b_t);
    std::env::set_var("TBSS_DUMP_CV", "1");
    let tuned = tune_lambdas(&series, spec.q, &tuning).unwrap();
    println!("winner l1 {:.4} l2 {:.5}", tuned.lambda1, tuned.lambda2);
    std::env::remove_var("TBSS_DUMP_CV");
    let s1 = step1_candidates(&series, spec.q, &tuning).unwrap();
    let mut jumps: Vec<(usize, f64)> = s1.theta.thetas.iter().enumerate().skip(1)
        .map(|(i, th)| (i + 1, th.iter().map(|v| v*v).sum())).collect();
    jumps.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    println!("top jumps (true break in block 10/11): {:?}",
        jumps.iter().take(8).map(|(b, j)| (*b, (j * 100.0).round() / 100.0)).collect::<Vec<_>>());
}

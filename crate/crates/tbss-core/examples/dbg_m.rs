use tbss_core::eval::*;
use tbss_core::model::*;
use tbss_core::solver::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let (series, spec, _) = generate_scenario("M", replicate_seed(seed, 0)).unwrap();
    let mut tuning = TuningConfig::new(mix_seed(replicate_seed(seed, 0), 0xDE7EC7));
    tuning.b_t = Some(spec.b_t);
    let partition = make_partition(spec.t_len, spec.q, spec.b_t).unwrap();
    let lmax = lambda_max(&series, &partition, 1).unwrap();
    let tuned = tune_lambdas(&series, 1, &tuning).unwrap();
    println!("lambda_max {lmax:.5}; tuned l1 {:.6} (ratio {:.4}), l2 {:.6}, mspe {:.5}",
        tuned.lambda1, tuned.lambda1 / lmax, tuned.lambda2, tuned.mspe);
    let s1 = step1_candidates(&series, 1, &tuning).unwrap();
    println!("candidates ({}): {:?}", s1.candidates.len(), s1.candidates.points());
    let s2 = step2_threshold(&s1.theta, &series, 1, &s1.candidates).unwrap();
    let mut jumps: Vec<(usize, f64)> = s1.theta.thetas.iter().enumerate()
        .map(|(i, th)| (i + 1, th.iter().map(|v| v*v).sum())).collect();
    jumps.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    println!("top jumps: {:?}", &jumps[..jumps.len().min(6)]);
    println!("survivors: {:?}; bic trace {:?}; selected {:?}", s2.survivors.points(), s2.bic_trace, s2.jumps.selected);
}

use tbss_core::eval::*;
use tbss_core::model::*;
use tbss_core::solver::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let rep_seed = replicate_seed(777, 21);
    let (series, spec, _) = generate_scenario("E.1", rep_seed).unwrap();
    let config = scenario_detect_config(&spec, rep_seed, &BenchmarkConfig::default());
    let tuned = tune_lambdas(&series, 1, &config.tuning).unwrap();
    let partition = make_partition(spec.t_len, 1, 31).unwrap();
    let engine_weights = PenaltyWeights::new(tuned.lambda1, tuned.lambda2, 0.0).unwrap();
    let fit = solve_step1_objective(&series, &partition, 1, &engine_weights, &config.tuning.solver).unwrap();
    println!("lambda1 {:.5}", tuned.lambda1);
    let mut jumps: Vec<(usize, f64, usize)> = fit.theta.thetas.iter().enumerate().skip(1)
        .map(|(i, th)| (i + 1, th.iter().map(|v| v*v).sum::<f64>(),
                        th.iter().filter(|v| v.abs() > 1e-10).count()))
        .collect();
    jumps.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    println!("block | jump | nnz (top 12):");
    for (b, j, n) in jumps.iter().take(12) {
        println!("  {:2} (start {}) | {:.4} | {}", b, partition.block_ends[b-1], j, n);
    }
}

use tbss_core::eval::*;

fn main() {
    for seed in [12345u64, 777, 9001, 31337] {
        let (det, _) = run_benchmark("E.1", 50, &BenchmarkConfig::default(), seed).unwrap();
        println!("seed {seed}: rates {:?} exact {:.2} fails {}",
            det.per_break.iter().map(|b| b.rate).collect::<Vec<_>>(),
            det.exact_count_rate, det.failures);
    }
}

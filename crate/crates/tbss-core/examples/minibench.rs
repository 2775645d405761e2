use tbss_core::eval::*;

fn main() {
    let scenario = std::env::args().nth(1).unwrap_or_else(|| "E.1".into());
    let n: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(10);
    let detection_only = std::env::args().nth(3).map(|s| s == "det").unwrap_or(false);
    let bench = BenchmarkConfig { detection_only, ..Default::default() };
    let t0 = std::time::Instant::now();
    let (det, est) = run_benchmark(&scenario, n, &bench, 12345).unwrap();
    println!("{}", render_table(&det, est.as_ref()));
    println!("exact-count rate: {:.2}; failures {}; total wall {:.1}s",
        det.exact_count_rate, det.failures, t0.elapsed().as_secs_f64());
}

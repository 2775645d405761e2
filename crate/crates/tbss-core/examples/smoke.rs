use tbss_core::eval::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let scenario = std::env::args().nth(1).unwrap_or_else(|| "E.1".into());
    let seed: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(42);
    let start = std::time::Instant::now();
    let (series, spec, model) = generate_scenario(&scenario, replicate_seed(seed, 0)).unwrap();
    println!("generated {} ({}x{}) in {:.2}s; true breaks {:?}",
        spec.name, series.t_len(), series.p(), start.elapsed().as_secs_f64(), spec.absolute_breaks());
    let config = scenario_detect_config(&spec, replicate_seed(seed, 0), &BenchmarkConfig::default());
    let start = std::time::Instant::now();
    let out = detect(&series, &config).unwrap();
    println!("detect in {:.2}s: lambda=({:.5},{:.6})", start.elapsed().as_secs_f64(), out.lambda1, out.lambda2);
    println!("candidates: {:?}", out.candidates.points());
    println!("thresholded: {:?}", out.thresholded.points());
    println!("refined: {:?}", out.refined.points());
    println!("timings: tune {:.0}ms s1 {:.0}ms s2 {:.0}ms s3 {:.0}ms s4 {:.0}ms s5 {:.0}ms",
        out.timings.tuning_ms, out.timings.step1_ms, out.timings.step2_ms,
        out.timings.step3_ms, out.timings.step4_ms, out.timings.step5_ms);
    let score = score_replicate(&out, &spec, &model).unwrap();
    println!("success: {:?}", score.success);
    if let Some(est) = &score.estimation {
        println!("SEN {:.3} SPC {:.3} MCC {:.3} RE {:.3}", est.sen, est.spc, est.mcc, est.re);
    }
    for w in &out.warnings { println!("warning: {w}"); }
}

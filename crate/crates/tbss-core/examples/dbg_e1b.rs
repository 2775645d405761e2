use tbss_core::eval::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let mut fails = 0;
    for r in 0..30 {
        let rep_seed = replicate_seed(777, r);
        let (series, spec, _) = generate_scenario("E.1", rep_seed).unwrap();
        let config = scenario_detect_config(&spec, rep_seed, &BenchmarkConfig::default());
        let det = detect_breaks(&series, spec.q, &config.tuning).unwrap();
        let ok = detection_success(det.refined.points(), &spec.absolute_breaks(), spec.t_len);
        let good = ok.iter().all(|s| *s);
        if !good { fails += 1; }
        println!("rep {r:2}: l1 {:.4} cand {:2} surv {:2} clusters {} refined {:?} ok={good}",
            det.lambda1, det.candidates.len(), det.thresholded.len(),
            det.clusters.n_clusters(), det.refined.points());
    }
    println!("failures: {fails}/30");
}

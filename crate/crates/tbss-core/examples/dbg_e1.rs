use tbss_core::eval::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    for r in 0..10 {
        let rep_seed = replicate_seed(12345, r);
        let (series, spec, _) = generate_scenario("E.1", rep_seed).unwrap();
        let config = scenario_detect_config(&spec, rep_seed, &BenchmarkConfig::default());
        let det = detect_breaks(&series, spec.q, &config.tuning).unwrap();
        let ok = detection_success(det.refined.points(), &spec.absolute_breaks(), spec.t_len);
        if ok.iter().any(|s| !s) {
            println!("rep {r}: refined {:?} candidates {:?} survivors {:?} l1 {:.5} l2 {:.6}",
                det.refined.points(), det.candidates.points(), det.thresholded.points(),
                det.lambda1, det.lambda2);
        }
    }
}

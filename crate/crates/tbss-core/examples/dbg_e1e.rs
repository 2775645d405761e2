use tbss_core::eval::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;
use tbss_core::model::*;

fn main() {
    for r in 0..50usize {
        let rep_seed = replicate_seed(12345, r);
        let (series, spec, _) = generate_scenario("E.1", rep_seed).unwrap();
        let config = scenario_detect_config(&spec, rep_seed, &BenchmarkConfig::default());
        let partition = make_partition(spec.t_len, spec.q, spec.b_t).unwrap();
        let lmax = tbss_core::solver::lambda_max(&series, &partition, spec.q).unwrap();
        let det = detect_breaks(&series, spec.q, &config.tuning).unwrap();
        let ok = detection_success(det.refined.points(), &spec.absolute_breaks(), spec.t_len);
        if !(ok.len() == 2 && ok.iter().all(|s| *s)) {
            println!("rep {r:2}: ratio {:.4} cand {:?} surv {:?} gap_k {} refined {:?}",
                det.lambda1 / lmax, det.candidates.len(), det.thresholded.points(),
                det.clusters.gap_k, det.refined.points());
        }
    }
}

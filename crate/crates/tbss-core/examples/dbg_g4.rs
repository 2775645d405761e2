use tbss_core::eval::*;
use tbss_core::model::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let mut hits = 0;
    for r in 0..20usize {
        let rep_seed = replicate_seed(12345, r);
        let (series, spec, _) = generate_scenario("G.1", rep_seed).unwrap();
        let config = scenario_detect_config(&spec, rep_seed, &BenchmarkConfig::default());
        let partition = make_partition(spec.t_len, spec.q, spec.b_t).unwrap();
        let lmax = tbss_core::solver::lambda_max(&series, &partition, spec.q).unwrap();
        let det = detect_breaks(&series, spec.q, &config.tuning).unwrap();
        let ok = detection_success(det.refined.points(), &spec.absolute_breaks(), spec.t_len);
        let good = !ok.is_empty() && ok.iter().all(|s| *s);
        if good { hits += 1; }
        println!("rep {r:2}: ratio {:.4} cand {:2} surv {} refined {:?} ok={good}",
            det.lambda1 / lmax, det.candidates.len(), det.thresholded.len(), det.refined.points());
    }
    println!("hits {hits}/20");
}

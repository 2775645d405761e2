use tbss_core::eval::*;
use tbss_core::model::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let ratio: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let mut hits = 0;
    for seed in 1..=10u64 {
        let rep_seed = replicate_seed(seed, 0);
        let (series, spec, _) = generate_scenario("G.1", rep_seed).unwrap();
        let partition = make_partition(spec.t_len, spec.q, spec.b_t).unwrap();
        let lmax = tbss_core::solver::lambda_max(&series, &partition, spec.q).unwrap();
        let mut tuning = TuningConfig::new(mix_seed(rep_seed, 0xDE7EC7));
        tuning.b_t = Some(spec.b_t);
        tuning.lambda_override = Some((ratio * lmax, 0.0001));
        let det = detect_breaks(&series, spec.q, &tuning).unwrap();
        let ok = detection_success(det.refined.points(), &spec.absolute_breaks(), spec.t_len);
        if ok.iter().all(|s| *s) && !ok.is_empty() { hits += 1; }
        println!("seed {seed}: refined {:?}", det.refined.points());
    }
    println!("ratio {ratio}: hits {hits}/10");
}

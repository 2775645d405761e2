use tbss_core::eval::*;
use tbss_core::model::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    for r in [4usize, 7, 10, 19, 21] {
        let rep_seed = replicate_seed(777, r);
        let (series, spec, _) = generate_scenario("E.1", rep_seed).unwrap();
        let config = scenario_detect_config(&spec, rep_seed, &BenchmarkConfig::default());
        let det = detect_breaks(&series, spec.q, &config.tuning).unwrap();
        println!("rep {r}: survivors {:?}", det.thresholded.points());
        // re-run step3 directly on the survivors with the same seed chain
        let partition = make_partition(spec.t_len, spec.q, config.tuning.block_size(spec.t_len)).unwrap();
        let cs = step3_cluster(&det.thresholded, &partition, spec.t_len, spec.q,
            mix_seed(config.tuning.seed, 3)).unwrap();
        println!("  direct step3 clusters: {:?}", cs.clusters);
        println!("  pipeline clusters: {:?}", det.clusters.clusters);
    }
}

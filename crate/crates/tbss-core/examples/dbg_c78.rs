use ndarray::Array2;
use tbss_core::eval::*;
use tbss_core::model::*;
use tbss_core::solver::SolverOptions;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    // criterion 7: fixed single-segment p=10 model, median RE decreasing in T
    let p = 10;
    let pattern = {
        let raw: Vec<Array2<f64>> = vec![
            (0..1).map(|_| ()).map(|_| {
                // fixed sparse pattern, seeded
                let mut m = Array2::<f64>::zeros((p, p));
                for i in 0..p - 1 { m[(i, i + 1)] = if i % 2 == 0 { 0.6 } else { -0.6 }; }
                for i in 0..p { m[(i, i)] = 0.4; }
                m
            }).next().unwrap()
        ];
        rescale_spectral_radius(&raw, 1, 0.8).unwrap().remove(0)
    };
    let model = PiecewiseVarModel::new(1, vec![], vec![pattern.clone()], Array2::eye(p) * 0.1).unwrap();
    for t_len in [400usize, 1600, 6400] {
        let mut res: Vec<f64> = (0..10).map(|r| {
            let sim = simulate_piecewise_var(&model, t_len, 500, replicate_seed(42, r)).unwrap();
            let fit = step5_estimate(
                &sim.series, 1, &BreakPointSet::empty(Stage::Refined),
                (t_len as f64).sqrt() as usize,
                &tbss_core::tbss::tuning::log_spaced(1.0, 1e-3, 10),
                &SolverOptions::default()).unwrap();
            relative_error(&fit.networks.networks[0], &pattern).unwrap()
        }).collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!("T {t_len}: median RE {:.4}", res[5]);
    }
    // criterion 8: stability mask FP <= unfiltered FP per replicate
    let bench = BenchmarkConfig { stability: Some(StabilityConfig::default()), ..Default::default() };
    for r in 0..5usize {
        let rep_seed = replicate_seed(7, r);
        let (series, spec, model) = generate_scenario("E.1", rep_seed).unwrap();
        let config = scenario_detect_config(&spec, rep_seed, &bench);
        let out = detect(&series, &config).unwrap();
        let truth = model.as_linear().unwrap();
        if out.refined.len() != truth.break_points.len() { println!("rep {r}: count mismatch"); continue; }
        let masks = out.networks.stability_mask.as_ref().unwrap();
        let mut fp_raw = 0; let mut fp_masked = 0;
        for (seg, tr) in truth.transitions.iter().enumerate() {
            let est = &out.networks.networks[seg];
            for ((i, j), v) in est.indexed_iter() {
                let est_nz = v.abs() > 1e-10;
                let masked_nz = est_nz && masks[seg][(i, j)];
                let true_nz = tr[(i, j)].abs() > 0.0;
                if est_nz && !true_nz { fp_raw += 1; }
                if masked_nz && !true_nz { fp_masked += 1; }
            }
        }
        println!("rep {r}: fp raw {fp_raw} masked {fp_masked}");
    }
}

use tbss_core::eval::*;
use tbss_core::model::*;
use tbss_core::solver::*;
use tbss_core::vargen::*;

fn main() {
    let seed: u64 = 1;
    let (series, spec, model) = generate_scenario("M", replicate_seed(seed, 0)).unwrap();
    let truth = model.as_linear().unwrap().transitions[0].clone();
    let partition = make_partition(spec.t_len, 1, spec.b_t).unwrap();
    let lmax = lambda_max(&series, &partition, 1).unwrap();
    for ratio in [0.4642, 0.2154, 0.1] {
        let weights = PenaltyWeights::new(ratio * lmax, 0.0001 * (20f64.ln()/600.0).sqrt(), 0.0).unwrap();
        let fit = solve_step1_objective(&series, &partition, 1, &weights, &SolverOptions::default()).unwrap();
        let mut phi = ndarray::Array2::<f64>::zeros((20, 20));
        print!("ratio {ratio}: dist-to-truth per block:");
        for (i, th) in fit.theta.thetas.iter().enumerate() {
            phi += th;
            let d: f64 = phi.iter().zip(truth.iter()).map(|(a,b)| (a-b)*(a-b)).sum::<f64>().sqrt();
            if i < 6 || i > 21 { print!(" b{}:{:.3}", i+1, d); }
        }
        println!();
    }
}

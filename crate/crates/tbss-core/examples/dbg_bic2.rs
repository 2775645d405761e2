use tbss_core::eval::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let scenario = std::env::args().nth(1).unwrap();
    for seed in 1..=10u64 {
        let rep_seed = replicate_seed(seed, 0);
        let (series, spec, _) = generate_scenario(&scenario, rep_seed).unwrap();
        let mut tuning = TuningConfig::new(mix_seed(rep_seed, 0xDE7EC7));
        tuning.b_t = Some(spec.b_t);
        let s1 = step1_candidates(&series, spec.q, &tuning).unwrap();
        let s2 = step2_threshold(&s1.theta, &series, spec.q, &s1.candidates).unwrap();
        println!("seed {seed}: cand {} surv {} trace {:?}",
            s1.candidates.len(), s2.survivors.len(),
            s2.bic_trace.iter().map(|v| format!("{v:.0}")).collect::<Vec<_>>());
    }
}

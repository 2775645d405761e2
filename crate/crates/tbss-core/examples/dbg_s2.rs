use tbss_core::eval::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    let rep_seed = replicate_seed(2, 0);
    let (series, spec, _) = generate_scenario("G.1", rep_seed).unwrap();
    let mut tuning = TuningConfig::new(mix_seed(rep_seed, 0xDE7EC7));
    tuning.b_t = Some(spec.b_t);
    let s1 = step1_candidates(&series, spec.q, &tuning).unwrap();
    println!("candidates: {:?}", s1.candidates.points());
    let jumps: Vec<(usize, f64)> = s1.theta.thetas.iter().enumerate()
        .map(|(i, th)| (i + 1, th.iter().map(|v| v * v).sum())).collect();
    println!("nonzero jumps: {:?}", jumps.iter().filter(|(_, j)| *j > 0.0).collect::<Vec<_>>());
    let s2 = step2_threshold(&s1.theta, &series, spec.q, &s1.candidates).unwrap();
    println!("selected blocks: {:?}", s2.jumps.selected);
    println!("survivors: {:?}", s2.survivors.points());
    println!("block_ends: {:?}", s1.theta.partition.block_ends);
}

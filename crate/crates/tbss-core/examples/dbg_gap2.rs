use tbss_core::eval::*;
use tbss_core::model::*;
use tbss_core::tbss::*;
use tbss_core::vargen::*;

fn main() {
    // rep 21's exact survivor set and seed chain
    let rep_seed = replicate_seed(777, 21);
    let det_seed = mix_seed(rep_seed, 0xDE7EC7);
    let survivors = BreakPointSet::new(vec![342, 652, 683, 931], Stage::Thresholded).unwrap();
    let partition = make_partition(1000, 1, 31).unwrap();
    std::env::set_var("TBSS_DUMP_GAP", "1");
    let cs = step3_cluster(&survivors, &partition, 1000, 1, mix_seed(det_seed, 3)).unwrap();
    println!("clusters: {:?}", cs.clusters);
}

use tbss_core::eval::*;

fn main() {
    let rows = run_blocksize_sweep("RT.1", &[50, 141, 300], 2, 99).unwrap();
    for r in &rows {
        println!("b_T {:4}: {:.2}s +- {:.2}", r.b_t, r.mean_s, r.sd_s);
    }
    // detection sanity at the default block size
    let bench = BenchmarkConfig { detection_only: true, ..Default::default() };
    let (det, _) = run_benchmark("RT.1", 2, &bench, 99).unwrap();
    for b in &det.per_break {
        println!("break mean {:.4} rate {:.2}", b.mean_rel, b.rate);
    }
}

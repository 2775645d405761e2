//! Scoring of detections against ground truth and the replicated benchmark
//! harness: per-break selection rates, support-recovery metrics, and the
//! block-size runtime sweep.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tbss::{
    detect, detect_breaks, DetectConfig, DetectionOutput, StabilityConfig, TuningConfig,
};
use crate::vargen::{generate_scenario, mix_seed, scenario_catalog, ScenarioModel, ScenarioSpec};

/// Support-recovery and value-accuracy metrics of an estimated network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimationReport {
    pub sen: f64,
    pub spc: f64,
    pub mcc: f64,
    /// Relative error in Frobenius norm; NaN when no truth values exist.
    pub re: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    /// True when the MCC denominator was zero and MCC was reported as 0.
    pub mcc_degenerate: bool,
}

/// Entrywise support comparison at `zero_tol`, then the printed formulas.
pub fn confusion_metrics(
    est: &Array2<f64>,
    truth: &Array2<f64>,
    zero_tol: f64,
) -> Result<EstimationReport> {
    if est.dim() != truth.dim() {
        return Err(Error::invalid("estimate and truth must have matching shapes"));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (e, t) in est.iter().zip(truth.iter()) {
        match (e.abs() > zero_tol, t.abs() > zero_tol) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let sen = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        f64::NAN
    };
    let spc = if tn + fp > 0 {
        tn as f64 / (tn + fp) as f64
    } else {
        f64::NAN
    };
    let denom =
        ((tp + fp) as f64 * (tp + fn_) as f64 * (tn + fp) as f64 * (tn + fn_) as f64).sqrt();
    let (mcc, mcc_degenerate) = if denom > 0.0 {
        (
            (tp as f64 * tn as f64 - fp as f64 * fn_ as f64) / denom,
            false,
        )
    } else {
        (0.0, true)
    };
    let re = if truth.iter().any(|v| *v != 0.0) {
        relative_error(est, truth)?
    } else {
        f64::NAN
    };
    Ok(EstimationReport {
        sen,
        spc,
        mcc,
        re,
        tp,
        fp,
        fn_,
        tn,
        mcc_degenerate,
    })
}

/// `||est - truth||_F / ||truth||_F`; the truth must not be all-zero.
pub fn relative_error(est: &Array2<f64>, truth: &Array2<f64>) -> Result<f64> {
    if est.dim() != truth.dim() {
        return Err(Error::invalid("estimate and truth must have matching shapes"));
    }
    let denom: f64 = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(Error::invalid("relative error undefined for an all-zero truth"));
    }
    let num: f64 = est
        .iter()
        .zip(truth.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

/// Per-true-break success booleans: break j succeeds when some estimated
/// point falls in `[t_{j-1} + (t_j - t_{j-1})/5, t_j + (t_{j+1} - t_j)/5]`
/// (with t_0 = 0, t_{m+1} = T), each estimate credited to at most one true
/// break, nearest first.
pub fn detection_success(est_points: &[usize], true_points: &[usize], t_len: usize) -> Vec<bool> {
    assignment(est_points, true_points, t_len)
        .iter()
        .map(|m| m.is_some())
        .collect()
}

/// Nearest-first assignment of estimates to true breaks within the
/// selection intervals; returns, per true break, the matched estimate.
pub fn assignment(est_points: &[usize], true_points: &[usize], t_len: usize) -> Vec<Option<usize>> {
    let m = true_points.len();
    let mut matched: Vec<Option<usize>> = vec![None; m];
    if m == 0 || est_points.is_empty() {
        return matched;
    }
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new(); // (distance, est idx, true idx)
    for (j, &t) in true_points.iter().enumerate() {
        let prev = if j == 0 { 0 } else { true_points[j - 1] };
        let next = if j + 1 == m { t_len } else { true_points[j + 1] };
        let lo = prev as f64 + (t - prev) as f64 / 5.0;
        let hi = t as f64 + (next - t) as f64 / 5.0;
        for (e_idx, &e) in est_points.iter().enumerate() {
            let ef = e as f64;
            if ef >= lo && ef <= hi {
                pairs.push((e.abs_diff(t), e_idx, j));
            }
        }
    }
    pairs.sort_unstable();
    let mut est_used = vec![false; est_points.len()];
    for (_, e_idx, j) in pairs {
        if matched[j].is_none() && !est_used[e_idx] {
            matched[j] = Some(est_points[e_idx]);
            est_used[e_idx] = true;
        }
    }
    matched
}

/// One-sided Hausdorff distance `max_{b in B} min_{a in A} |b - a|`.
/// An empty reference set A against a nonempty B yields infinity; an empty
/// B yields 0.
pub fn hausdorff(a: &[usize], b: &[usize]) -> f64 {
    if b.is_empty() {
        return 0.0;
    }
    if a.is_empty() {
        return f64::INFINITY;
    }
    b.iter()
        .map(|&bp| a.iter().map(|&ap| ap.abs_diff(bp)).min().unwrap() as f64)
        .fold(0.0, f64::max)
}

/// Fraction of entries whose support indicators differ.
pub fn hamming_network(a: &Array2<bool>, b: &Array2<bool>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid("masks must have matching shapes"));
    }
    let differing = a.iter().zip(b.iter()).filter(|(x, y)| x != y).count();
    Ok(differing as f64 / a.len() as f64)
}

/// Per-break aggregate over replicates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BreakStats {
    /// Mean relative location of the matched estimates.
    pub mean_rel: f64,
    /// Standard deviation of the matched relative locations (0 for a
    /// single replicate).
    pub sd_rel: f64,
    /// Fraction of replicates in which this break was detected.
    pub rate: f64,
}

/// Detection-side aggregate report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub scenario: String,
    pub n_replicates: usize,
    pub failures: usize,
    pub per_break: Vec<BreakStats>,
    /// Fraction of replicates detecting every break with the exact count.
    pub exact_count_rate: f64,
    pub wall_clock_mean_s: f64,
    pub wall_clock_sd_s: f64,
    /// Detection phase (tuning through refinement) wall clock.
    pub detection_mean_s: f64,
}

/// Scoring of one replicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateScore {
    pub success: Vec<bool>,
    /// Matched estimate per true break, in relative location.
    pub matched_rel: Vec<Option<f64>>,
    /// Support/value metrics pooled over segments; `None` when the segment
    /// count differs from the truth or no linear truth exists.
    pub estimation: Option<EstimationReport>,
}

/// Scores a pipeline output against a scenario's ground truth. Estimation
/// metrics pool the confusion counts over segments and average the
/// per-segment relative errors; they are computed only when the detected
/// segment count matches the truth.
pub fn score_replicate(
    output: &DetectionOutput,
    spec: &ScenarioSpec,
    model: &ScenarioModel,
) -> Result<ReplicateScore> {
    let truth_breaks = spec.absolute_breaks();
    let est = output.refined.points();
    let success = detection_success(est, &truth_breaks, spec.t_len);
    let matched_rel = assignment(est, &truth_breaks, spec.t_len)
        .iter()
        .map(|m| m.map(|e| e as f64 / spec.t_len as f64))
        .collect();
    let estimation = match model {
        ScenarioModel::Linear(truth) if est.len() == truth.break_points.len() => {
            let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
            let mut re_sum = 0.0;
            for (seg, truth_m) in truth.transitions.iter().enumerate() {
                let rep = confusion_metrics(
                    &output.networks.networks[seg],
                    truth_m,
                    crate::tbss::SUPPORT_TOL,
                )?;
                tp += rep.tp;
                fp += rep.fp;
                fn_ += rep.fn_;
                tn += rep.tn;
                re_sum += rep.re;
            }
            let sen = tp as f64 / (tp + fn_).max(1) as f64;
            let spc = tn as f64 / (tn + fp).max(1) as f64;
            let denom =
                ((tp + fp) as f64 * (tp + fn_) as f64 * (tn + fp) as f64 * (tn + fn_) as f64)
                    .sqrt();
            let (mcc, deg) = if denom > 0.0 {
                (
                    (tp as f64 * tn as f64 - fp as f64 * fn_ as f64) / denom,
                    false,
                )
            } else {
                (0.0, true)
            };
            Some(EstimationReport {
                sen,
                spc,
                mcc,
                re: re_sum / truth.transitions.len() as f64,
                tp,
                fp,
                fn_,
                tn,
                mcc_degenerate: deg,
            })
        }
        _ => None,
    };
    Ok(ReplicateScore {
        success,
        matched_rel,
        estimation,
    })
}

/// Benchmark controls.
#[derive(Debug, Clone, Default)]
pub struct BenchmarkConfig {
    /// Override the scenario's default block size.
    pub b_t: Option<usize>,
    /// Run stability selection per replicate.
    pub stability: Option<StabilityConfig>,
    /// Run replicates sequentially (default parallel).
    pub sequential: bool,
    /// Stop after the detection phase (steps 1-4); estimation metrics are
    /// then not computed. Used for scenarios scored on detection alone.
    pub detection_only: bool,
}

/// Seed of replicate `idx` under base seed `base`; exposed so single runs
/// can reproduce benchmark replicates bit for bit.
pub fn replicate_seed(base: u64, idx: usize) -> u64 {
    mix_seed(base, idx as u64)
}

/// Detection configuration a benchmark replicate runs with.
pub fn scenario_detect_config(
    spec: &ScenarioSpec,
    rep_seed: u64,
    bench: &BenchmarkConfig,
) -> DetectConfig {
    let mut config = DetectConfig::new(spec.q, mix_seed(rep_seed, 0xDE7EC7));
    config.tuning.b_t = Some(bench.b_t.unwrap_or(spec.b_t));
    config.stability = bench.stability;
    config
}

/// Runs `n_replicates` seeded replicates of a scenario, detects on each,
/// and aggregates detection and estimation metrics. Per-replicate failures
/// are recorded, not fatal.
pub fn run_benchmark(
    scenario: &str,
    n_replicates: usize,
    bench: &BenchmarkConfig,
    seed: u64,
) -> Result<(DetectionReport, Option<EstimationReport>)> {
    if n_replicates == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    let (spec0, _) = scenario_catalog(scenario)?;
    let run_one = |r: usize| -> Result<(ReplicateScore, f64, f64)> {
        let rep_seed = replicate_seed(seed, r);
        let (series, spec, model) = generate_scenario(scenario, rep_seed)?;
        let config = scenario_detect_config(&spec, rep_seed, bench);
        let start = std::time::Instant::now();
        if bench.detection_only {
            let detection = detect_breaks(&series, spec.q, &config.tuning)?;
            let total_s = start.elapsed().as_secs_f64();
            let detection_s = detection.timings.detection_ms() / 1e3;
            let truth_breaks = spec.absolute_breaks();
            let est = detection.refined.points();
            let score = ReplicateScore {
                success: detection_success(est, &truth_breaks, spec.t_len),
                matched_rel: assignment(est, &truth_breaks, spec.t_len)
                    .iter()
                    .map(|m| m.map(|e| e as f64 / spec.t_len as f64))
                    .collect(),
                estimation: None,
            };
            return Ok((score, total_s, detection_s));
        }
        let output = detect(&series, &config)?;
        let total_s = start.elapsed().as_secs_f64();
        let detection_s = output.timings.detection_ms() / 1e3;
        let score = score_replicate(&output, &spec, &model)?;
        Ok((score, total_s, detection_s))
    };
    let results: Vec<Result<(ReplicateScore, f64, f64)>> = if bench.sequential {
        (0..n_replicates).map(run_one).collect()
    } else {
        (0..n_replicates).into_par_iter().map(run_one).collect()
    };

    let m = spec0.relative_breaks.len();
    let mut success_counts = vec![0usize; m];
    let mut rel_samples: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut est_reports = Vec::new();
    let mut exact_count = 0usize;
    let mut times = Vec::new();
    let mut det_times = Vec::new();
    let mut failures = 0usize;
    for res in results {
        match res {
            Err(_) => failures += 1,
            Ok((score, total_s, detection_s)) => {
                for (j, ok) in score.success.iter().enumerate() {
                    if *ok {
                        success_counts[j] += 1;
                    }
                }
                for (j, rel) in score.matched_rel.iter().enumerate() {
                    if let Some(v) = rel {
                        rel_samples[j].push(*v);
                    }
                }
                if score.success.iter().all(|s| *s) {
                    exact_count += 1;
                }
                if let Some(est) = score.estimation {
                    est_reports.push(est);
                }
                times.push(total_s);
                det_times.push(detection_s);
            }
        }
    }
    let completed = n_replicates - failures;
    let per_break = (0..m)
        .map(|j| {
            let (mean, sd) = mean_sd(&rel_samples[j]);
            BreakStats {
                mean_rel: mean,
                sd_rel: sd,
                rate: if completed > 0 {
                    success_counts[j] as f64 / completed as f64
                } else {
                    0.0
                },
            }
        })
        .collect();
    let (wall_mean, wall_sd) = mean_sd(&times);
    let (det_mean, _) = mean_sd(&det_times);
    let detection = DetectionReport {
        scenario: scenario.to_string(),
        n_replicates,
        failures,
        per_break,
        exact_count_rate: if completed > 0 {
            exact_count as f64 / completed as f64
        } else {
            0.0
        },
        wall_clock_mean_s: wall_mean,
        wall_clock_sd_s: wall_sd,
        detection_mean_s: det_mean,
    };
    let estimation = if est_reports.is_empty() {
        None
    } else {
        let n = est_reports.len() as f64;
        let avg = |f: fn(&EstimationReport) -> f64| {
            est_reports.iter().map(f).filter(|v| v.is_finite()).sum::<f64>() / n
        };
        Some(EstimationReport {
            sen: avg(|r| r.sen),
            spc: avg(|r| r.spc),
            mcc: avg(|r| r.mcc),
            re: avg(|r| r.re),
            tp: est_reports.iter().map(|r| r.tp).sum(),
            fp: est_reports.iter().map(|r| r.fp).sum(),
            fn_: est_reports.iter().map(|r| r.fn_).sum(),
            tn: est_reports.iter().map(|r| r.tn).sum(),
            mcc_degenerate: false,
        })
    };
    Ok((detection, estimation))
}

fn mean_sd(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row of the block-size runtime sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub b_t: usize,
    pub mean_s: f64,
    pub sd_s: f64,
}

/// Times the detection phase (tuning through refinement) of a scenario at
/// each block size, averaged over replicates.
pub fn run_blocksize_sweep(
    scenario: &str,
    block_sizes: &[usize],
    n_replicates: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(block_sizes.len());
    for &b_t in block_sizes {
        let mut times = Vec::with_capacity(n_replicates);
        for r in 0..n_replicates {
            let rep_seed = replicate_seed(seed, r);
            let (series, spec, _) = generate_scenario(scenario, rep_seed)?;
            let mut tuning = TuningConfig::new(mix_seed(rep_seed, 0xDE7EC7));
            tuning.b_t = Some(b_t);
            let start = std::time::Instant::now();
            let _ = detect_breaks(&series, spec.q, &tuning)?;
            times.push(start.elapsed().as_secs_f64());
        }
        let (mean_s, sd_s) = mean_sd(&times);
        rows.push(SweepRow { b_t, mean_s, sd_s });
    }
    Ok(rows)
}

/// Plain-text table mirroring the benchmark column order
/// (CP, mean, sd, rate, time, SEN, SPC, MCC, RE).
pub fn render_table(detection: &DetectionReport, estimation: Option<&EstimationReport>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "scenario {} ({} replicates, {} failures)\n",
        detection.scenario, detection.n_replicates, detection.failures
    ));
    out.push_str("  CP   mean     sd     rate   time(s)  SEN    SPC    MCC    RE\n");
    let est_cols = match estimation {
        Some(e) => format!("{:<6.2} {:<6.2} {:<6.2} {:<6.3}", e.sen, e.spc, e.mcc, e.re),
        None => "-      -      -      -".to_string(),
    };
    if detection.per_break.is_empty() {
        out.push_str(&format!(
            "  -    -        -      -      {:<8.2} {est_cols}\n",
            detection.wall_clock_mean_s
        ));
    }
    for (j, b) in detection.per_break.iter().enumerate() {
        if j == 0 {
            out.push_str(&format!(
                "  {:<4} {:<8.3} {:<6.3} {:<6.2} {:<8.2} {est_cols}\n",
                j + 1,
                b.mean_rel,
                b.sd_rel,
                b.rate,
                detection.wall_clock_mean_s
            ));
        } else {
            out.push_str(&format!(
                "  {:<4} {:<8.3} {:<6.3} {:<6.2}\n",
                j + 1,
                b.mean_rel,
                b.sd_rel,
                b.rate
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn confusion_perfect_match() {
        let truth = arr2(&[[0.5, 0.0], [0.0, -0.3]]);
        let rep = confusion_metrics(&truth, &truth, 1e-10).unwrap();
        assert_eq!((rep.sen, rep.spc, rep.mcc), (1.0, 1.0, 1.0));
        assert_eq!(rep.re, 0.0);
    }

    #[test]
    fn mcc_perfect_confusion() {
        // TP = 2, TN = 2, FP = FN = 0
        let truth = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
        let est = arr2(&[[0.7, 0.0], [0.0, 0.2]]);
        let rep = confusion_metrics(&est, &truth, 1e-10).unwrap();
        assert_eq!((rep.tp, rep.tn, rep.fp, rep.fn_), (2, 2, 0, 0));
        assert_eq!(rep.mcc, 1.0);
    }

    #[test]
    fn confusion_matches_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let est = Array2::from_shape_fn((4, 4), |_| {
                if rng.random::<f64>() < 0.5 {
                    0.0
                } else {
                    rng.random::<f64>() - 0.5
                }
            });
            let truth = Array2::from_shape_fn((4, 4), |_| {
                if rng.random::<f64>() < 0.5 {
                    0.0
                } else {
                    rng.random::<f64>() - 0.5
                }
            });
            let rep = confusion_metrics(&est, &truth, 1e-10).unwrap();
            // direct entrywise enumeration
            let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
            for i in 0..4 {
                for j in 0..4 {
                    let e = est[(i, j)] != 0.0;
                    let t = truth[(i, j)] != 0.0;
                    match (e, t) {
                        (true, true) => tp += 1,
                        (true, false) => fp += 1,
                        (false, true) => fn_ += 1,
                        (false, false) => tn += 1,
                    }
                }
            }
            assert_eq!((rep.tp, rep.fp, rep.fn_, rep.tn), (tp, fp, fn_, tn));
            assert_eq!(rep.tp + rep.fp + rep.fn_ + rep.tn, 16);
            // MCC recomputed from the enumerated counts
            let denom = ((tp + fp) as f64
                * (tp + fn_) as f64
                * (tn + fp) as f64
                * (tn + fn_) as f64)
                .sqrt();
            if denom > 0.0 {
                let mcc = (tp as f64 * tn as f64 - fp as f64 * fn_ as f64) / denom;
                assert!((rep.mcc - mcc).abs() < 1e-12);
            } else {
                assert!(rep.mcc_degenerate);
            }
        }
    }

    #[test]
    fn relative_error_examples() {
        let truth = arr2(&[[1.0, 2.0], [0.0, -1.0]]);
        assert_eq!(relative_error(&truth, &truth).unwrap(), 0.0);
        let double = &truth * 2.0;
        assert!((relative_error(&double, &truth).unwrap() - 1.0).abs() < 1e-12);
        let zero = Array2::zeros((2, 2));
        assert!(relative_error(&truth, &zero).is_err());
        // random pair vs elementwise-sum oracle
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let est = Array2::from_shape_fn((3, 3), |_| rng.random::<f64>());
        let tr = Array2::from_shape_fn((3, 3), |_| rng.random::<f64>() + 0.1);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                num += (est[(i, j)] - tr[(i, j)]).powi(2);
                den += tr[(i, j)].powi(2);
            }
        }
        let oracle = (num / den).sqrt();
        assert!((relative_error(&est, &tr).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn detection_success_interval_arithmetic() {
        // T=1000, truth {500}: interval is [100, 600]; 601 fails, 600 passes
        assert_eq!(detection_success(&[601], &[500], 1000), vec![false]);
        assert_eq!(detection_success(&[600], &[500], 1000), vec![true]);
        assert_eq!(detection_success(&[500], &[500], 1000), vec![true]);
    }

    #[test]
    fn detection_success_credits_each_estimate_once() {
        // one estimate between two true breaks is credited to the nearer
        let successes = detection_success(&[480], &[450, 500], 1000);
        assert_eq!(successes, vec![false, true]);
        // two estimates in one interval count as a single success
        let successes = detection_success(&[495, 505], &[500], 1000);
        assert_eq!(successes, vec![true]);
    }

    #[test]
    fn hausdorff_examples_and_oracle() {
        assert_eq!(hausdorff(&[100], &[100]), 0.0);
        assert_eq!(hausdorff(&[100], &[90, 110]), 10.0);
        assert_eq!(hausdorff(&[], &[]), 0.0);
        assert_eq!(hausdorff(&[], &[5]), f64::INFINITY);
        assert_eq!(hausdorff(&[5], &[]), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a: Vec<usize> = (0..1 + rng.random_range(0..5usize))
                .map(|_| rng.random_range(0..1000))
                .collect();
            let b: Vec<usize> = (0..1 + rng.random_range(0..5usize))
                .map(|_| rng.random_range(0..1000))
                .collect();
            let mut oracle = 0.0_f64;
            for &bp in &b {
                let mut nearest = f64::INFINITY;
                for &ap in &a {
                    nearest = nearest.min(ap.abs_diff(bp) as f64);
                }
                oracle = oracle.max(nearest);
            }
            assert_eq!(hausdorff(&a, &b), oracle);
        }
    }

    #[test]
    fn hamming_examples() {
        let a = Array2::from_elem((2, 2), true);
        assert_eq!(hamming_network(&a, &a).unwrap(), 0.0);
        let b = Array2::from_elem((2, 2), false);
        assert_eq!(hamming_network(&a, &b).unwrap(), 1.0);
        let mixed = arr2(&[[true, false], [false, false]]);
        assert_eq!(hamming_network(&a, &mixed).unwrap(), 0.75);
    }

    #[test]
    fn mean_sd_single_sample_is_zero_sd() {
        let (mean, sd) = mean_sd(&[0.4]);
        assert_eq!((mean, sd), (0.4, 0.0));
    }
}

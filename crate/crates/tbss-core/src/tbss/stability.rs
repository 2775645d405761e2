//! Stability selection over the estimated segment networks: repeated
//! half-length refits per segment, selection frequencies per edge, and the
//! stable mask used to filter false positives out of the estimates.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{lag_embed, BreakPointSet, TimeSeriesMatrix};
use crate::solver::{lasso_solve_gram, rho_max, SolverOptions};
use crate::tbss::segments::segment_ranges;
use crate::tbss::SUPPORT_TOL;
use crate::vargen::mix_seed;

/// Per-segment selection frequencies and the thresholded mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentStability {
    /// Fraction of subsamples selecting each edge, maximized over the
    /// penalty grid.
    pub selection_prob: Array2<f64>,
    /// `selection_prob >= tau`.
    pub stable_mask: Array2<bool>,
}

/// Stability selection outcome; a `None` entry marks a segment too short to
/// subsample at half length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityResult {
    pub segments: Vec<Option<SegmentStability>>,
    pub tau: f64,
    pub n_subsamples: usize,
    pub warnings: Vec<String>,
}

impl StabilityResult {
    /// Masks for filtering the step-5 networks; segments that could not be
    /// subsampled keep everything (all-true).
    pub fn masks_or_full(&self, p: usize, pq: usize) -> Vec<Array2<bool>> {
        self.segments
            .iter()
            .map(|s| match s {
                Some(seg) => seg.stable_mask.clone(),
                None => Array2::from_elem((p, pq), true),
            })
            .collect()
    }
}

/// Runs stability selection on the trimmed segments: for each penalty in
/// the segment's grid and each of `n_subsamples` contiguous half-length
/// windows, refits the lasso and records the selected support. An edge's
/// selection probability is its selection frequency maximized over the
/// grid; the stable set keeps probabilities at or above `tau`.
///
/// Contiguous windows (rather than scattered subsamples) preserve the
/// autocorrelation structure the regression relies on.
pub fn step6_stability(
    ts: &TimeSeriesMatrix,
    q: usize,
    refined: &BreakPointSet,
    r_t: usize,
    rho_multipliers: &[f64],
    n_subsamples: usize,
    tau: f64,
    seed: u64,
    opts: &SolverOptions,
) -> Result<StabilityResult> {
    if n_subsamples < 2 {
        return Err(Error::invalid("stability selection needs at least 2 subsamples"));
    }
    if !(0.0..1.0).contains(&tau) || tau == 0.0 {
        return Err(Error::invalid("tau must lie in (0, 1)"));
    }
    if rho_multipliers.is_empty() {
        return Err(Error::invalid("rho grid must be nonempty"));
    }
    let ranges = segment_ranges(ts.t_len(), q, refined.points(), r_t)?;
    let embedded = lag_embed(ts, q)?;
    let x = ts.data();
    let p = ts.p();
    let pq = embedded.ncols();
    let mut warnings = Vec::new();
    let mut segments = Vec::with_capacity(ranges.len());
    for (seg_idx, &(lo, hi)) in ranges.iter().enumerate() {
        let n_rows = hi - lo;
        let window = n_rows / 2;
        if window < pq.min(8).max(2) {
            warnings.push(format!(
                "segment {} has only {n_rows} usable rows; too short to halve, excluded from stability selection",
                seg_idx + 1
            ));
            segments.push(None);
            continue;
        }
        // penalty grid anchored on the full segment so the rho meaning is
        // shared across subsamples
        let nf = n_rows as f64;
        let mut corr_full = Array2::<f64>::zeros((pq, p));
        for m in lo..hi {
            let row = embedded.row(m - q);
            for a in 0..pq {
                for c in 0..p {
                    corr_full[(a, c)] += row[a] * x[(m, c)];
                }
            }
        }
        let rho_top = (0..p)
            .map(|c| rho_max(&(corr_full.column(c).to_owned() / nf)))
            .fold(0.0_f64, f64::max);
        let grid: Vec<f64> = rho_multipliers.iter().map(|m| m * rho_top).collect();

        // per-(rho, edge) selection counts, accumulated over subsamples
        let counts: Vec<Array2<usize>> = (0..n_subsamples)
            .into_par_iter()
            .map(|sub| {
                let sub_seed = mix_seed(mix_seed(seed, seg_idx as u64), sub as u64);
                let start = lo + (sub_seed as usize) % (n_rows - window + 1);
                let wf = window as f64;
                let mut gram = Array2::<f64>::zeros((pq, pq));
                let mut corr = Array2::<f64>::zeros((pq, p));
                for m in start..start + window {
                    let row = embedded.row(m - q);
                    for a in 0..pq {
                        let ra = row[a];
                        if ra == 0.0 {
                            continue;
                        }
                        for b in a..pq {
                            gram[(a, b)] += ra * row[b];
                        }
                        for c in 0..p {
                            corr[(a, c)] += ra * x[(m, c)];
                        }
                    }
                }
                for a in 0..pq {
                    for b in 0..a {
                        gram[(a, b)] = gram[(b, a)];
                    }
                }
                let gram_n = &gram / wf;
                let mut local = vec![Array2::<usize>::zeros((p, pq)); grid.len()];
                for c in 0..p {
                    let corr_c = corr.column(c).to_owned() / wf;
                    let mut warm = Array1::<f64>::zeros(pq);
                    for (gi, &rho) in grid.iter().enumerate() {
                        let fit = lasso_solve_gram(&gram_n, &corr_c, rho, opts, warm.clone());
                        warm = fit.beta.clone();
                        for a in 0..pq {
                            if fit.beta[a].abs() > SUPPORT_TOL {
                                local[gi][(c, a)] += 1;
                            }
                        }
                    }
                }
                local
            })
            .reduce(
                || vec![Array2::<usize>::zeros((p, pq)); grid.len()],
                |mut acc, local| {
                    for (a, l) in acc.iter_mut().zip(local) {
                        *a += &l;
                    }
                    acc
                },
            );

        let mut prob = Array2::<f64>::zeros((p, pq));
        for count in &counts {
            for (pr, &ct) in prob.iter_mut().zip(count.iter()) {
                *pr = pr.max(ct as f64 / n_subsamples as f64);
            }
        }
        let mask = prob.mapv(|v| v >= tau);
        segments.push(Some(SegmentStability {
            selection_prob: prob,
            stable_mask: mask,
        }));
    }
    Ok(StabilityResult {
        segments,
        tau,
        n_subsamples,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PiecewiseVarModel, Stage};
    use crate::tbss::tuning::log_spaced;
    use crate::vargen::simulate_piecewise_var;
    use ndarray::arr2;

    #[test]
    fn strong_edge_is_always_selected() {
        // coefficient 0.8 with sigma^2 = 0.1 over T = 1000: every
        // half-window refit keeps the edge, so its probability is 1.0
        let phi = arr2(&[[0.0, 0.8], [0.0, 0.0]]);
        let model =
            PiecewiseVarModel::new(1, vec![], vec![phi], Array2::eye(2) * 0.1).unwrap();
        let sim = simulate_piecewise_var(&model, 1000, 300, 21).unwrap();
        let res = step6_stability(
            &sim.series,
            1,
            &BreakPointSet::empty(Stage::Refined),
            10,
            &log_spaced(1.0, 1e-2, 5),
            20,
            0.8,
            7,
            &SolverOptions::default(),
        )
        .unwrap();
        let seg = res.segments[0].as_ref().unwrap();
        assert_eq!(seg.selection_prob[(0, 1)], 1.0);
        assert!(seg.stable_mask[(0, 1)]);
    }

    #[test]
    fn mask_is_elementwise_threshold_and_monotone_in_tau() {
        let phi = arr2(&[[0.3, 0.0], [0.0, -0.3]]);
        let model =
            PiecewiseVarModel::new(1, vec![], vec![phi], Array2::eye(2) * 0.1).unwrap();
        let sim = simulate_piecewise_var(&model, 400, 100, 5).unwrap();
        let run = |tau: f64| {
            step6_stability(
                &sim.series,
                1,
                &BreakPointSet::empty(Stage::Refined),
                10,
                &log_spaced(1.0, 1e-2, 4),
                10,
                tau,
                7,
                &SolverOptions::default(),
            )
            .unwrap()
        };
        let low = run(0.5);
        let high = run(0.9);
        let seg_low = low.segments[0].as_ref().unwrap();
        let seg_high = high.segments[0].as_ref().unwrap();
        for ((pr, &ml), &mh) in seg_low
            .selection_prob
            .iter()
            .zip(seg_low.stable_mask.iter())
            .zip(seg_high.stable_mask.iter())
        {
            assert_eq!(ml, *pr >= 0.5);
            // raising tau never adds edges
            if mh {
                assert!(ml);
            }
        }
    }

    #[test]
    fn short_segment_excluded_with_warning() {
        let phi = arr2(&[[0.5, 0.0], [0.0, 0.5]]);
        let model =
            PiecewiseVarModel::new(1, vec![], vec![phi], Array2::eye(2) * 0.1).unwrap();
        let sim = simulate_piecewise_var(&model, 40, 100, 5).unwrap();
        let res = step6_stability(
            &sim.series,
            1,
            &BreakPointSet::empty(Stage::Refined),
            18,
            &[0.5],
            5,
            0.8,
            7,
            &SolverOptions::default(),
        );
        // with a break at 20 and radius 16, both segments shrink below the
        // usable half-window size and are excluded
        let res2 = step6_stability(
            &sim.series,
            1,
            &BreakPointSet::new(vec![20], Stage::Refined).unwrap(),
            16,
            &[0.5],
            5,
            0.8,
            7,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(res.is_ok());
        assert!(res2.segments.iter().any(|s| s.is_none()));
        assert!(!res2.warnings.is_empty());
    }
}

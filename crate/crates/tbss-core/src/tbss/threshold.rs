//! Hard thresholding of candidate break points: iterated 2-means on the
//! per-block jump sizes, keeping a batch of large-jump blocks only while it
//! lowers the BIC of the masked fit.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{BreakPointSet, Stage, ThetaEstimate, TimeSeriesMatrix};
use crate::solver::Step1Engine;
use crate::tbss::cluster::kmeans_1d;

/// Jump sizes per block and the selected large-jump set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpProfile {
    /// v_k = ||theta_k||_2^2 with v_1 = 0.
    pub jumps: Vec<f64>,
    /// 1-based indices of the blocks kept as large jumps.
    pub selected: Vec<usize>,
    /// Last midpoint threshold eta = (min V_L + max V_S) / 2 applied.
    pub threshold: f64,
}

/// Output of the thresholding step.
#[derive(Debug, Clone)]
pub struct Step2Output {
    pub survivors: BreakPointSet,
    pub jumps: JumpProfile,
    /// BIC values of the accepted iterations (strictly decreasing).
    pub bic_trace: Vec<f64>,
    /// True when the jump values admitted no 2-means split.
    pub degenerate: bool,
}

/// Screens the candidate set: repeatedly 2-means the remaining jump values,
/// moves the large-jump blocks into the kept set, and stops (rolling the
/// last batch back) as soon as the BIC of the masked fit stops decreasing.
/// The BIC starts at the no-break model (all changes masked), so even the
/// first batch must genuinely improve on a single-regime fit; stationary
/// series then shed their spurious candidates here.
pub fn step2_threshold(
    theta: &ThetaEstimate,
    ts: &TimeSeriesMatrix,
    q: usize,
    candidates: &BreakPointSet,
) -> Result<Step2Output> {
    let partition = &theta.partition;
    let k_t = partition.k_t();
    let mut jumps = vec![0.0; k_t];
    for (i, th) in theta.thetas.iter().enumerate().skip(1) {
        jumps[i] = th.iter().map(|v| v * v).sum();
    }
    let profile_base = JumpProfile {
        jumps: jumps.clone(),
        selected: Vec::new(),
        threshold: f64::NAN,
    };
    if candidates.is_empty() {
        return Ok(Step2Output {
            survivors: candidates.advance(Vec::new(), Stage::Thresholded)?,
            jumps: profile_base,
            bic_trace: Vec::new(),
            degenerate: false,
        });
    }

    let engine = Step1Engine::new(ts, partition, q, &[])?;
    let scorer = BicScorer::new(&engine, theta, ts.t_len(), ts.p());

    // active pool of block indices still up for selection (block 1 carries
    // the base coefficient and never joins)
    let mut active: Vec<usize> = (2..=k_t).collect();
    let mut kept: Vec<usize> = Vec::new();
    let mut bic_old = scorer.bic(&kept);
    let mut bic_trace = Vec::new();
    let mut threshold = f64::NAN;
    loop {
        let mut values: Vec<f64> = active.iter().map(|&i| jumps[i - 1]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        if values.len() < 2 {
            if kept.is_empty() {
                // degenerate clustering: keep the candidate set unchanged
                return Ok(Step2Output {
                    survivors: candidates.advance(candidates.points().to_vec(), Stage::Thresholded)?,
                    jumps: profile_base,
                    bic_trace,
                    degenerate: true,
                });
            }
            break;
        }
        let sorted: Vec<f64> = {
            let mut v: Vec<f64> = active.iter().map(|&i| jumps[i - 1]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        let (_, bounds) = kmeans_1d(&sorted, 2);
        let split = bounds[1];
        let max_small = sorted[split - 1];
        let min_large = sorted[split];
        let eta = 0.5 * (min_large + max_small);
        let batch: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| jumps[i - 1] > eta)
            .collect();
        if batch.is_empty() {
            break;
        }
        let mut trial = kept.clone();
        trial.extend_from_slice(&batch);
        trial.sort_unstable();
        let bic_new = scorer.bic(&trial);
        if bic_new - bic_old >= 0.0 {
            break;
        }
        threshold = eta;
        bic_trace.push(bic_new);
        bic_old = bic_new;
        kept = trial;
        active.retain(|i| !batch.contains(i));
        if active.is_empty() {
            break;
        }
    }

    let survivor_points: Vec<usize> = candidates
        .points()
        .iter()
        .copied()
        .filter(|&t| {
            let block = match partition.block_ends.binary_search(&t) {
                Ok(pos) => pos + 1,
                Err(pos) => pos,
            };
            kept.binary_search(&block).is_ok()
        })
        .collect();
    Ok(Step2Output {
        survivors: candidates.advance(survivor_points, Stage::Thresholded)?,
        jumps: JumpProfile {
            jumps,
            selected: kept,
            threshold,
        },
        bic_trace,
        degenerate: false,
    })
}

/// Gaussian BIC of the segmentation implied by the kept change blocks:
/// `sum_j n_j log(RSS_j/n_j) + log(T) * df`, where segment j's RSS comes
/// from an unpenalized least-squares refit (each kept block's start opens
/// a new segment), n_j counts its scalar observations, and df counts the
/// refit parameters plus one profiled noise variance per segment. Scoring
/// refits rather than the masked penalized fit keeps the decision
/// invariant to how strongly the path estimate was shrunk, and profiling
/// the variance per segment (the model allows a different noise covariance
/// per regime) lets pure variance changes register.
struct BicScorer<'a> {
    engine: &'a Step1Engine,
    theta: &'a ThetaEstimate,
    t_len: usize,
    p: usize,
}

impl<'a> BicScorer<'a> {
    fn new(engine: &'a Step1Engine, theta: &'a ThetaEstimate, t_len: usize, p: usize) -> Self {
        Self {
            engine,
            theta,
            t_len,
            p,
        }
    }

    /// `kept` holds sorted 1-based block indices (>= 2) whose coefficient
    /// change survives; block 1 is always retained.
    fn bic(&self, kept: &[usize]) -> f64 {
        let partition = &self.theta.partition;
        let k_t = partition.k_t();
        let pq = self.theta.thetas[0].ncols();
        // segment boundaries in block space: a kept change at block i means
        // a new segment starts there
        let mut starts = vec![1usize];
        starts.extend(kept.iter().copied());
        let mut loglik = 0.0;
        let mut df = 0usize;
        for (s_idx, &seg_start) in starts.iter().enumerate() {
            let seg_end = starts.get(s_idx + 1).copied().unwrap_or(k_t + 1);
            let mut gram = Array2::<f64>::zeros((pq, pq));
            let mut corr = Array2::<f64>::zeros((pq, self.p));
            let mut sq = vec![0.0; self.p];
            let mut n_rows = 0usize;
            for i in seg_start..seg_end {
                gram += &self.engine.grams[i - 1];
                corr += &self.engine.corrs[i - 1];
                let (s, e) = self.theta.partition.block_range(i);
                n_rows += e - s;
                for row in 0..self.p {
                    sq[row] += self.engine.sqnorms[(i - 1, row)];
                }
            }
            let ridge =
                1e-9 * (0..pq).map(|a| gram[(a, a)]).sum::<f64>().max(1e-300) / pq as f64;
            for a in 0..pq {
                gram[(a, a)] += ridge;
            }
            df += self.p * pq + 1;
            let mut rss_seg = 0.0;
            match solve_spd_multi(&gram, &corr) {
                Some(phi) => {
                    for row in 0..self.p {
                        rss_seg += (sq[row] - phi.column(row).dot(&corr.column(row))).max(0.0);
                    }
                }
                None => {
                    rss_seg = sq.iter().sum();
                }
            }
            let n_seg = (n_rows * self.p) as f64;
            loglik += n_seg * (rss_seg.max(1e-300) / n_seg).ln();
        }
        loglik + (self.t_len as f64).ln() * df as f64
    }
}

/// Cholesky solve with a matrix right-hand side.
fn solve_spd_multi(a: &Array2<f64>, b: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let m = b.ncols();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[(i, j)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    let mut x = Array2::<f64>::zeros((n, m));
    for c in 0..m {
        for i in 0..n {
            let mut s = b[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Some(x)
}

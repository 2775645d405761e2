//! Per-segment sparse VAR estimation after break detection: trims a radius
//! around every refined break point, then solves an l1-penalized regression
//! per segment. The penalty is chosen by BIC over a grid, with each
//! support scored by its unpenalized refit so shrinkage bias cannot sway
//! the model-size choice, and the reported coefficients are the refit on
//! the winning support (relaxed form; plain l1 values are far more biased
//! at the support-recovery penalty).

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{lag_embed, BreakPointSet, SegmentNetworkSet, TimeSeriesMatrix};
use crate::solver::{lasso_solve_gram, rho_max, SolverOptions};
use crate::tbss::SUPPORT_TOL;

/// Diagnostics of the segment estimation step.
#[derive(Debug, Clone)]
pub struct Step5Output {
    pub networks: SegmentNetworkSet,
    /// Penalty chosen per segment.
    pub rhos: Vec<f64>,
    /// Rows available per segment after trimming.
    pub segment_rows: Vec<usize>,
    pub converged: bool,
}

/// Response ranges `[lo, hi)` of the stationary segments once every index
/// within `r_t` of a break point is removed from the design rows. A row for
/// response `x_m` touches indices `m-q ..= m`, so the response range of the
/// segment following break `t` starts at `t + r_t + q + 1`, and the one
/// preceding it ends at `t - r_t` (exclusive).
pub(crate) fn segment_ranges(
    t_len: usize,
    q: usize,
    refined: &[usize],
    r_t: usize,
) -> Result<Vec<(usize, usize)>> {
    let mut ranges = Vec::with_capacity(refined.len() + 1);
    let mut lo = q;
    for (j, &b) in refined.iter().enumerate() {
        let hi = b.saturating_sub(r_t);
        if hi <= lo {
            let left = if j == 0 { 0 } else { refined[j - 1] };
            return Err(Error::EmptySegment { left, right: b });
        }
        ranges.push((lo, hi));
        lo = b + r_t + q + 1;
    }
    if t_len <= lo {
        let left = *refined.last().unwrap_or(&0);
        return Err(Error::EmptySegment { left, right: t_len });
    }
    ranges.push((lo, t_len));
    Ok(ranges)
}

/// Fits one segment: per-response-row coordinate descent over the rho grid
/// (descending, warm-started), pooled-BIC selection of rho.
struct SegmentFit {
    network: Array2<f64>,
    rho: f64,
    converged: bool,
}

fn fit_segment(
    embedded: &Array2<f64>,
    x: &Array2<f64>,
    range: (usize, usize),
    q: usize,
    rho_multipliers: &[f64],
    opts: &SolverOptions,
) -> SegmentFit {
    let (lo, hi) = range;
    let n = hi - lo;
    let p = x.ncols();
    let pq = embedded.ncols();
    let nf = n as f64;
    // segment sufficient statistics
    let mut gram = Array2::<f64>::zeros((pq, pq));
    let mut corr = Array2::<f64>::zeros((pq, p));
    let mut sqnorm = vec![0.0; p];
    for m in lo..hi {
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
        for c in 0..p {
            sqnorm[c] += x[(m, c)] * x[(m, c)];
        }
    }
    for a in 0..pq {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    let gram_n = &gram / nf;
    // grid anchored at the largest penalty that zeroes every row
    let rho_top = (0..p)
        .map(|c| rho_max(&(corr.column(c).to_owned() / nf)))
        .fold(0.0_f64, f64::max);
    let grid: Vec<f64> = rho_multipliers.iter().map(|m| m * rho_top).collect();

    struct RowPath {
        betas: Vec<Array1<f64>>,
        converged: bool,
    }
    let rows: Vec<RowPath> = (0..p)
        .into_par_iter()
        .map(|c| {
            let corr_c = corr.column(c).to_owned() / nf;
            let mut warm = Array1::<f64>::zeros(pq);
            let mut betas = Vec::with_capacity(grid.len());
            let mut converged = true;
            for &rho in &grid {
                let fit = lasso_solve_gram(&gram_n, &corr_c, rho, opts, warm.clone());
                converged &= fit.converged;
                warm = fit.beta.clone();
                betas.push(fit.beta);
            }
            RowPath { betas, converged }
        })
        .collect();

    // pooled BIC over the grid, scoring each support by its unpenalized
    // refit so that shrinkage bias does not leak into the model-size choice
    let mut best = (f64::INFINITY, 0usize);
    for (gi, _) in grid.iter().enumerate() {
        let mut rss = 0.0;
        let mut nnz = 0usize;
        for (c, row) in rows.iter().enumerate() {
            let beta = &row.betas[gi];
            let support: Vec<usize> = (0..pq)
                .filter(|&a| beta[a].abs() > SUPPORT_TOL)
                .collect();
            nnz += support.len();
            rss += refit_rss(&gram, &corr.column(c).to_owned(), sqnorm[c], &support);
        }
        let n_sc = (n * p) as f64;
        let bic = n_sc * (rss.max(1e-300) / n_sc).ln() + n_sc.ln() * nnz as f64;
        // ties (same support, hence same refit) resolve to the smaller
        // penalty, i.e. the least-shrunk estimate of that support
        if bic <= best.0 {
            best = (bic, gi);
        }
    }
    // final values: unpenalized refit on the winning support (relaxed
    // lasso); the raw path estimate backs any row whose refit is singular
    let gi = best.1;
    let mut network = Array2::<f64>::zeros((p, pq));
    for (c, row) in rows.iter().enumerate() {
        let beta = &row.betas[gi];
        let support: Vec<usize> = (0..pq)
            .filter(|&a| beta[a].abs() > SUPPORT_TOL)
            .collect();
        match refit_coefficients(&gram, &corr.column(c).to_owned(), &support) {
            Some(b) => {
                for (i, &a) in support.iter().enumerate() {
                    network[(c, a)] = b[i];
                }
            }
            None => {
                for a in 0..pq {
                    network[(c, a)] = beta[a];
                }
            }
        }
    }
    SegmentFit {
        network,
        rho: grid[gi],
        converged: rows.iter().all(|r| r.converged),
    }
}

/// Unpenalized least-squares refit restricted to `support`, from the raw
/// sufficient statistics (gram = X'X, corr = X'y). A tiny ridge keeps
/// near-collinear supports solvable; a singular system yields `None`.
fn refit_coefficients(
    gram: &Array2<f64>,
    corr: &Array1<f64>,
    support: &[usize],
) -> Option<Array1<f64>> {
    let k = support.len();
    if k == 0 {
        return None;
    }
    let mut g = Array2::<f64>::zeros((k, k));
    let mut c = Array1::<f64>::zeros(k);
    for (i, &a) in support.iter().enumerate() {
        c[i] = corr[a];
        for (j, &b) in support.iter().enumerate() {
            g[(i, j)] = gram[(a, b)];
        }
    }
    let ridge = 1e-10 * (0..k).map(|i| g[(i, i)]).sum::<f64>().max(1e-300) / k as f64;
    for i in 0..k {
        g[(i, i)] += ridge;
    }
    solve_spd(&g, &c)
}

/// Residual sum of the restricted refit; falls back to the null fit when
/// the support is empty or singular.
fn refit_rss(gram: &Array2<f64>, corr: &Array1<f64>, sqnorm: f64, support: &[usize]) -> f64 {
    match refit_coefficients(gram, corr, support) {
        Some(b) => {
            let c = Array1::from_iter(support.iter().map(|&a| corr[a]));
            (sqnorm - b.dot(&c)).max(0.0)
        }
        None => sqnorm,
    }
}

/// Cholesky solve of a symmetric positive-definite system.
fn solve_spd(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
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
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Some(x)
}

/// Estimates the per-segment transition matrices on the trimmed segments.
/// `rho_multipliers` scale each segment's own rho_max into its penalty
/// grid; the grid value minimizing the segment BIC is kept.
pub fn step5_estimate(
    ts: &TimeSeriesMatrix,
    q: usize,
    refined: &BreakPointSet,
    r_t: usize,
    rho_multipliers: &[f64],
    opts: &SolverOptions,
) -> Result<Step5Output> {
    if rho_multipliers.is_empty() {
        return Err(Error::invalid("rho grid must be nonempty"));
    }
    let ranges = segment_ranges(ts.t_len(), q, refined.points(), r_t)?;
    let embedded = lag_embed(ts, q)?;
    let x = ts.data();
    let fits: Vec<SegmentFit> = ranges
        .iter()
        .map(|&range| fit_segment(&embedded, x, range, q, rho_multipliers, opts))
        .collect();
    let networks = SegmentNetworkSet::new(
        fits.iter().map(|f| f.network.clone()).collect(),
        ranges.clone(),
    )?;
    Ok(Step5Output {
        networks,
        rhos: fits.iter().map(|f| f.rho).collect(),
        segment_rows: ranges.iter().map(|&(lo, hi)| hi - lo).collect(),
        converged: fits.iter().all(|f| f.converged),
    })
}

//! Tuning parameter selection: the cross-validated penalty grid for the
//! block fused lasso, the data-driven block size search, and BIC lag
//! selection.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{make_partition, BlockPartition, TimeSeriesMatrix};
use crate::solver::{PenaltyWeights, SolverOptions, Step1Engine};
use crate::tbss::{detect_breaks, segment_ranges, step5_estimate};
use crate::vargen::mix_seed;

/// Grid sizes and floors of the penalty search.
const K1: usize = 10;
const K2: usize = 5;
const C_MAX: f64 = 0.1;
const C_FLOOR: f64 = 1e-3;

/// Tuning controls for the detection pipeline. Empty grids are filled in
/// from the data (log-spaced from the corresponding data-driven maximum).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningConfig {
    /// Decreasing lambda1 grid; empty means derive from `lambda_max`.
    pub lambda1_grid: Vec<f64>,
    /// Decreasing scale grid for lambda2 = c * sqrt(log p / T); empty means
    /// the default K2-point grid from 0.1 down to 1e-4.
    pub lambda2_scale_grid: Vec<f64>,
    /// Decreasing multipliers of each segment's own rho_max for the
    /// segment lasso grid.
    pub rho_grid: Vec<f64>,
    /// Block size; `None` means floor(sqrt(T)).
    pub b_t: Option<usize>,
    /// Trim radius; `None` means equal to the block size.
    pub r_t: Option<usize>,
    /// Fraction of blocks whose end points are held out during
    /// cross-validation.
    pub cv_holdout_fraction: f64,
    pub seed: u64,
    /// Skip cross-validation and use this pair directly.
    pub lambda_override: Option<(f64, f64)>,
    /// Solver controls for the final fit.
    pub solver: SolverOptions,
    /// Lighter solver controls for the grid-evaluation fits.
    pub cv_solver: SolverOptions,
}

impl TuningConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            lambda1_grid: Vec::new(),
            lambda2_scale_grid: Vec::new(),
            rho_grid: log_spaced(1.0, 1e-3, 10),
            b_t: None,
            r_t: None,
            cv_holdout_fraction: 0.2,
            seed,
            lambda_override: None,
            solver: SolverOptions::default(),
            cv_solver: SolverOptions {
                max_iter: 500,
                tol: 1e-5,
                ..SolverOptions::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [
            ("lambda1_grid", &self.lambda1_grid),
            ("lambda2_scale_grid", &self.lambda2_scale_grid),
            ("rho_grid", &self.rho_grid),
        ] {
            if grid.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
            if grid.windows(2).any(|w| w[0] <= w[1]) {
                return Err(Error::invalid(format!("{name} must be strictly decreasing")));
            }
        }
        if self.rho_grid.is_empty() {
            return Err(Error::invalid("rho_grid must be nonempty"));
        }
        if !(0.0..=0.5).contains(&self.cv_holdout_fraction) || self.cv_holdout_fraction == 0.0 {
            return Err(Error::invalid("cv_holdout_fraction must lie in (0, 0.5]"));
        }
        if let (Some(b), Some(r)) = (self.b_t, self.r_t) {
            if r < b {
                return Err(Error::invalid("the trim radius R_T must be at least b_T"));
            }
        }
        self.solver.validate()?;
        self.cv_solver.validate()
    }

    /// Block size to use for a series of length `t_len`.
    pub fn block_size(&self, t_len: usize) -> usize {
        self.b_t
            .unwrap_or_else(|| (t_len as f64).sqrt().floor() as usize)
    }

    /// Trim radius; defaults to the block size.
    pub fn trim_radius(&self, t_len: usize) -> usize {
        self.r_t.unwrap_or_else(|| self.block_size(t_len))
    }
}

/// Log-spaced grid from `hi` down to `hi * ratio_floor`.
pub fn log_spaced(hi: f64, ratio_floor: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    (0..n)
        .map(|i| hi * ratio_floor.powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Cross-validation outcome.
#[derive(Debug, Clone)]
pub struct TunedLambdas {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mspe: f64,
    pub grid_size: (usize, usize),
    pub warnings: Vec<String>,
}

/// Selects (lambda1, lambda2) by a 2-D grid search: 20% of the blocks are
/// chosen equally spaced with a seeded random initial block and held out of
/// the fit entirely; the pair minimizing the mean squared prediction error
/// at the held-out blocks' end points wins. The lambda1 grid is log-spaced
/// from `lambda_max` down to eps * lambda_max with eps = 1e-3 when
/// b_T <= 2p and 1e-4 otherwise; lambda2 = c * sqrt(log p / T) with c on a
/// log grid from 0.1 down to 1e-4.
pub fn tune_lambdas(
    ts: &TimeSeriesMatrix,
    q: usize,
    tuning: &TuningConfig,
) -> Result<TunedLambdas> {
    tuning.validate()?;
    if let Some((l1, l2)) = tuning.lambda_override {
        return Ok(TunedLambdas {
            lambda1: l1,
            lambda2: l2,
            mspe: f64::NAN,
            grid_size: (1, 1),
            warnings: Vec::new(),
        });
    }
    let t_len = ts.t_len();
    let p = ts.p();
    let b_t = tuning.block_size(t_len);
    let partition = make_partition(t_len, q, b_t)?;
    let k_t = partition.k_t();

    // grids: lambda1 from the full-data KKT bound, lambda2 scales fixed
    let full_engine = Step1Engine::new(ts, &partition, q, &[])?;
    let lambda1_grid = if tuning.lambda1_grid.is_empty() {
        let lmax = full_engine.lambda_max_bound()?;
        let eps = if b_t <= 2 * p { 1e-3 } else { 1e-4 };
        log_spaced(lmax, eps, K1)
    } else {
        tuning.lambda1_grid.clone()
    };
    let c_grid = if tuning.lambda2_scale_grid.is_empty() {
        log_spaced(C_MAX, C_FLOOR, K2)
    } else {
        tuning.lambda2_scale_grid.clone()
    };
    let lambda2_unit = ((p as f64).ln() / t_len as f64).sqrt();

    // equally spaced holdout blocks with a seeded random initial block;
    // every row of a selected block leaves the fit, so its coefficient is
    // pinned only through the fusion to its neighbours, and the prediction
    // at its end point scores how well the fitted path carries over
    let stride = (1.0 / tuning.cv_holdout_fraction).round().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(tuning.seed, 0x747e));
    let offset = rng.random_range(0..stride.min(k_t));
    let held_blocks: Vec<usize> = (1..=k_t).filter(|i| (i - 1) % stride == offset).collect();
    let mut holdout: Vec<usize> = Vec::new();
    let mut predict_at: Vec<usize> = Vec::new();
    for &i in &held_blocks {
        let (start, end) = partition.block_range(i);
        holdout.extend(start..end);
        predict_at.push(end - 1);
    }
    if predict_at.is_empty() {
        predict_at.push(partition.block_ends[k_t] - 1);
        holdout.push(partition.block_ends[k_t] - 1);
    }
    holdout.sort_unstable();

    let engine = Step1Engine::new(ts, &partition, q, &holdout)?;
    let x = ts.data();
    // (lambda1, lambda2, mspe, standard error of the mspe estimate)
    let mut table: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(lambda1_grid.len() * c_grid.len());
    let mut warnings = Vec::new();
    for &c in &c_grid {
        let lambda2 = c * lambda2_unit;
        let mut warm: Option<Vec<Array2<f64>>> = None;
        for &lambda1 in &lambda1_grid {
            let weights = PenaltyWeights::new(lambda1, lambda2, 0.0)?;
            let (_, trajectories) =
                engine.solve(&weights, &tuning.cv_solver, warm.as_deref())?;
            let mut point_mse = Vec::with_capacity(predict_at.len());
            for &t in &predict_at {
                let pred = engine.predict(&trajectories, t);
                let mut sse = 0.0;
                for j in 0..p {
                    let r = x[(t, j)] - pred[j];
                    sse += r * r;
                }
                point_mse.push(sse / p as f64);
            }
            let m = point_mse.len() as f64;
            let mspe = point_mse.iter().sum::<f64>() / m;
            let var = point_mse
                .iter()
                .map(|v| (v - mspe) * (v - mspe))
                .sum::<f64>()
                / (m - 1.0).max(1.0);
            let se = (var / m).sqrt();
            if std::env::var_os("TBSS_DUMP_CV").is_some() {
                eprintln!("cv c={c:.4} lambda1={lambda1:.6} mspe={mspe:.6} se={se:.6}");
            }
            if mspe.is_finite() {
                table.push((lambda1, lambda2, mspe, se));
            }
            warm = Some(trajectories);
        }
    }
    if table.is_empty() {
        warnings.push("all cross-validation fits were degenerate; using grid midpoint".into());
        let lambda1 = lambda1_grid[lambda1_grid.len() / 2];
        let lambda2 = c_grid[c_grid.len() / 2] * lambda2_unit;
        return Ok(TunedLambdas {
            lambda1,
            lambda2,
            mspe: f64::NAN,
            grid_size: (lambda1_grid.len(), c_grid.len()),
            warnings,
        });
    }
    // prediction errors closer than the cross-validation solver's own
    // resolution are ties; resolve them toward the stronger penalty
    let min_mspe = table
        .iter()
        .map(|row| row.2)
        .fold(f64::INFINITY, f64::min);
    let tie = min_mspe * (1.0 + 5e-3);
    let &(lambda1, lambda2, mspe, _) = table
        .iter()
        .filter(|row| row.2 <= tie)
        .max_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap())
        .unwrap();
    Ok(TunedLambdas {
        lambda1,
        lambda2,
        mspe,
        grid_size: (lambda1_grid.len(), c_grid.len()),
        warnings,
    })
}

/// Data-driven block size search: runs the detection phase with block sizes
/// `floor(T^(0.5 - j/(2K)))` for j = 0, 1, ... and stops at the first j
/// whose refined break count matches that of j + 1.
pub fn select_block_size(
    ts: &TimeSeriesMatrix,
    q: usize,
    k_steps: usize,
    tuning: &TuningConfig,
) -> Result<usize> {
    if k_steps < 2 {
        return Err(Error::invalid("the block size search needs K >= 2"));
    }
    let t_len = ts.t_len() as f64;
    let default_b = t_len.sqrt().floor() as usize;
    let sizes: Vec<usize> = (0..k_steps)
        .map(|j| t_len.powf(0.5 - j as f64 / (2.0 * k_steps as f64)).floor() as usize)
        .filter(|&b| b >= 2 && b <= ts.t_len() - q)
        .collect();
    let mut distinct = Vec::new();
    for b in sizes {
        if distinct.last() != Some(&b) {
            distinct.push(b);
        }
    }
    let mut counts: Vec<Option<usize>> = vec![None; distinct.len()];
    let count_at = |idx: usize, counts: &mut Vec<Option<usize>>| -> Result<usize> {
        if counts[idx].is_none() {
            let mut t = tuning.clone();
            t.b_t = Some(distinct[idx]);
            t.r_t = None;
            let detection = detect_breaks(ts, q, &t)?;
            counts[idx] = Some(detection.refined.len());
        }
        Ok(counts[idx].unwrap())
    };
    for j in 0..distinct.len().saturating_sub(1) {
        let c0 = count_at(j, &mut counts)?;
        let c1 = count_at(j + 1, &mut counts)?;
        if c0 == c1 {
            return Ok(distinct[j]);
        }
    }
    Ok(default_b)
}

/// BIC lag selection: runs the full detection pipeline for each candidate
/// lag, fits the per-segment models, and scores
/// `BIC_d = sum_j [ log det(Sigma_j) + log(segment length) * nnz_j ]`.
/// Segments whose residual covariance stays singular after a 1e-6 ridge are
/// skipped with a warning.
pub fn select_lag(ts: &TimeSeriesMatrix, d_max: usize, tuning: &TuningConfig) -> Result<usize> {
    if d_max < 1 {
        return Err(Error::invalid("d_max must be at least 1"));
    }
    if d_max == 1 {
        return Ok(1);
    }
    let t_len = ts.t_len();
    let p = ts.p();
    let mut best: Option<(f64, usize)> = None;
    for d in 1..=d_max {
        let detection = match detect_breaks(ts, d, tuning) {
            Ok(det) => det,
            Err(_) => continue,
        };
        let r_t = tuning.trim_radius(t_len);
        let fit = match step5_estimate(
            ts,
            d,
            &detection.refined,
            r_t,
            &tuning.rho_grid,
            &tuning.solver,
        ) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let ranges = segment_ranges(t_len, d, detection.refined.points(), r_t)?;
        let embedded = crate::model::lag_embed(ts, d)?;
        let x = ts.data();
        let mut total = 0.0;
        let mut valid = true;
        let bounds: Vec<usize> = std::iter::once(0)
            .chain(detection.refined.points().iter().copied())
            .chain(std::iter::once(t_len))
            .collect();
        for (j, &(lo, hi)) in ranges.iter().enumerate() {
            let n_j = (hi - lo) as f64;
            let mut sigma = Array2::<f64>::zeros((p, p));
            for m in lo..hi {
                let pred = fit.networks.networks[j].dot(&embedded.row(m - d));
                for a in 0..p {
                    let ra = x[(m, a)] - pred[a];
                    for b in 0..p {
                        let rb = x[(m, b)] - pred[b];
                        sigma[(a, b)] += ra * rb / n_j;
                    }
                }
            }
            for a in 0..p {
                sigma[(a, a)] += 1e-6;
            }
            let Some(logdet) = log_det_cholesky(&sigma) else {
                valid = false;
                break;
            };
            let seg_len = (bounds[j + 1] - bounds[j]) as f64;
            let nnz = fit.networks.networks[j]
                .iter()
                .filter(|v| v.abs() > 1e-10)
                .count() as f64;
            total += logdet + seg_len.ln() * nnz;
        }
        if valid && best.map_or(true, |(b, _)| total < b) {
            best = Some((total, d));
        }
    }
    best.map(|(_, d)| d)
        .ok_or_else(|| Error::Numerical("no candidate lag produced a valid BIC".into()))
}

fn log_det_cholesky(m: &Array2<f64>) -> Option<f64> {
    let n = m.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    let mut logdet = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                let d = s.sqrt();
                l[(i, j)] = d;
                logdet += 2.0 * d.ln();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Some(logdet)
}

/// Partition used by the detection phase for this configuration.
pub(crate) fn detection_partition(
    ts: &TimeSeriesMatrix,
    q: usize,
    tuning: &TuningConfig,
) -> Result<BlockPartition> {
    make_partition(ts.t_len(), q, tuning.block_size(ts.t_len()))
}

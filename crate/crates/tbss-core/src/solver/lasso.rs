//! L1-penalized least squares by cyclic coordinate descent with covariance
//! updates, plus the weakly-sparse (lq-ball) post-processing variant.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::solver::tv1d::soft_threshold;
use crate::solver::SolverOptions;

/// Result of a lasso solve; `converged` is false when the KKT residual was
/// still above tolerance at the iteration cap.
#[derive(Debug, Clone)]
pub struct LassoFit {
    pub beta: Array1<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes `(1/n) ||y - X beta||^2 + rho ||beta||_1`.
pub fn lasso_solve(x: &Array2<f64>, y: &Array1<f64>, rho: f64, opts: &SolverOptions) -> Result<LassoFit> {
    let n = x.nrows();
    if n != y.len() {
        return Err(Error::invalid(format!(
            "design has {n} rows but response has {} entries",
            y.len()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("empty design"));
    }
    if rho < 0.0 || !rho.is_finite() {
        return Err(Error::invalid("rho must be nonnegative and finite"));
    }
    let nf = n as f64;
    let gram = x.t().dot(x) / nf;
    let corr = x.t().dot(y) / nf;
    let warm = Array1::zeros(x.ncols());
    Ok(lasso_solve_gram(&gram, &corr, rho, opts, warm))
}

/// Coordinate descent on the covariance form: `gram = X'X/n`, `corr = X'y/n`.
/// The warm start is consumed and updated in place.
pub fn lasso_solve_gram(
    gram: &Array2<f64>,
    corr: &Array1<f64>,
    rho: f64,
    opts: &SolverOptions,
    warm: Array1<f64>,
) -> LassoFit {
    let d = corr.len();
    let mut beta = warm;
    // gb = gram * beta, maintained incrementally
    let mut gb = gram.dot(&beta);
    let half_rho = rho / 2.0;
    let mut converged = false;
    let mut iterations = 0;
    for sweep in 0..opts.max_iter {
        iterations = sweep + 1;
        for c in 0..d {
            let gcc = gram[(c, c)];
            if gcc <= 0.0 {
                continue;
            }
            let old = beta[c];
            let partial = corr[c] - gb[c] + gcc * old;
            let new = soft_threshold(partial, half_rho) / gcc;
            if new != old {
                let delta = new - old;
                beta[c] = new;
                for r in 0..d {
                    gb[r] += delta * gram[(r, c)];
                }
            }
        }
        if kkt_residual(gram, corr, rho, &beta, &mut gb) <= opts.tol {
            converged = true;
            break;
        }
    }
    LassoFit {
        beta,
        converged,
        iterations,
    }
}

/// Maximum KKT violation: at zeros `|grad| - rho`, at nonzeros
/// `|grad + rho sign(beta)|`, with `grad = 2(gram beta - corr)`.
fn kkt_residual(
    gram: &Array2<f64>,
    corr: &Array1<f64>,
    rho: f64,
    beta: &Array1<f64>,
    gb: &mut Array1<f64>,
) -> f64 {
    *gb = gram.dot(beta); // refresh to avoid drift from incremental updates
    let mut worst = 0.0_f64;
    for c in 0..beta.len() {
        let grad = 2.0 * (gb[c] - corr[c]);
        let viol = if beta[c] == 0.0 {
            (grad.abs() - rho).max(0.0)
        } else {
            (grad + rho * beta[c].signum()).abs()
        };
        worst = worst.max(viol);
    }
    worst
}

/// Smallest `rho` at which the lasso solution is identically zero:
/// `2 * max |X'y| / n` in the covariance form.
pub fn rho_max(corr: &Array1<f64>) -> f64 {
    2.0 * corr.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Lasso fit followed by the weak-sparsity fill: zero entries are replaced
/// by a common magnitude, maximal subject to the lq-ball budget
/// `sum |b_i|^exponent <= radius`, signed by the unpenalized correlation.
#[derive(Debug, Clone)]
pub struct WeaklySparseFit {
    pub coefficients: Array1<f64>,
    /// Magnitude used to fill the zero entries; `None` when nothing was
    /// filled (dense solution or exceeded budget).
    pub fill_magnitude: Option<f64>,
    /// True when the lasso solution alone already violates the ball.
    pub budget_exceeded: bool,
}

const SUPPORT_TOL: f64 = 1e-12;

/// Solves the lasso at `rho`, then fills zeros per the lq-ball budget.
pub fn weakly_sparse_estimate(
    x: &Array2<f64>,
    y: &Array1<f64>,
    radius: f64,
    exponent: f64,
    rho: f64,
    opts: &SolverOptions,
) -> Result<WeaklySparseFit> {
    if radius <= 0.0 {
        return Err(Error::invalid("lq-ball radius must be positive"));
    }
    if !(0.0..1.0).contains(&exponent) || exponent == 0.0 {
        return Err(Error::invalid("lq-ball exponent must lie in (0, 1)"));
    }
    let fit = lasso_solve(x, y, rho, opts)?;
    let mut beta = fit.beta;
    let zeros: Vec<usize> = (0..beta.len())
        .filter(|&i| beta[i].abs() <= SUPPORT_TOL)
        .collect();
    let budget_used: f64 = beta
        .iter()
        .filter(|v| v.abs() > SUPPORT_TOL)
        .map(|v| v.abs().powf(exponent))
        .sum();
    if budget_used > radius {
        return Ok(WeaklySparseFit {
            coefficients: beta,
            fill_magnitude: None,
            budget_exceeded: true,
        });
    }
    if zeros.is_empty() {
        return Ok(WeaklySparseFit {
            coefficients: beta,
            fill_magnitude: None,
            budget_exceeded: false,
        });
    }
    let eps = ((radius - budget_used) / zeros.len() as f64).powf(1.0 / exponent);
    let corr = x.t().dot(y);
    for &i in &zeros {
        let sign = if corr[i] < 0.0 { -1.0 } else { 1.0 };
        beta[i] = sign * eps;
    }
    Ok(WeaklySparseFit {
        coefficients: beta,
        fill_magnitude: Some(eps),
        budget_exceeded: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr1;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn opts() -> SolverOptions {
        SolverOptions {
            max_iter: 10_000,
            tol: 1e-10,
            ..SolverOptions::default()
        }
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
        Array2::from_shape_fn((r, c), |_| rng.random::<f64>() * 2.0 - 1.0)
    }

    fn objective(x: &Array2<f64>, y: &Array1<f64>, rho: f64, beta: &Array1<f64>) -> f64 {
        let r = y - &x.dot(beta);
        r.dot(&r) / x.nrows() as f64 + rho * beta.iter().map(|v| v.abs()).sum::<f64>()
    }

    #[test]
    fn unpenalized_recovers_ols() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 4;
        let mut x = random_matrix(&mut rng, d, d);
        for i in 0..d {
            x[(i, i)] += 3.0; // keep the system well conditioned
        }
        let beta_true = arr1(&[1.0, -2.0, 0.5, 0.0]);
        let y = x.dot(&beta_true);
        let fit = lasso_solve(&x, &y, 0.0, &opts()).unwrap();
        assert!(fit.converged);
        for (a, b) in fit.beta.iter().zip(beta_true.iter()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn orthonormal_design_matches_closed_form() {
        // Gram-Schmidt on a random tall matrix gives orthonormal columns.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n, d) = (30, 4);
        let mut x = random_matrix(&mut rng, n, d);
        for c in 0..d {
            for prev in 0..c {
                let dot = x.column(c).dot(&x.column(prev));
                let col_prev = x.column(prev).to_owned();
                x.column_mut(c).zip_mut_with(&col_prev, |a, b| *a -= dot * b);
            }
            let norm = x.column(c).dot(&x.column(c)).sqrt();
            x.column_mut(c).mapv_inplace(|v| v / norm);
        }
        let y = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);
        let rho = 0.07;
        let fit = lasso_solve(&x, &y, rho, &opts()).unwrap();
        let xty = x.t().dot(&y);
        for c in 0..d {
            let expected = soft_threshold(xty[c], n as f64 * rho / 2.0);
            assert!((fit.beta[c] - expected).abs() < 1e-9);
        }
    }

    /// Plain subgradient descent on the identical objective; independent of
    /// the coordinate-descent path.
    fn subgradient_reference(x: &Array2<f64>, y: &Array1<f64>, rho: f64, iters: usize) -> f64 {
        let n = x.nrows() as f64;
        let mut beta = Array1::<f64>::zeros(x.ncols());
        let mut best = objective(x, y, rho, &beta);
        let scale = objective(x, y, rho, &beta).max(1.0);
        for t in 1..=iters {
            let r = x.dot(&beta) - y;
            let mut g = x.t().dot(&r) * (2.0 / n);
            for (gc, bc) in g.iter_mut().zip(beta.iter()) {
                *gc += rho * if *bc > 0.0 { 1.0 } else if *bc < 0.0 { -1.0 } else { 0.0 };
            }
            let gnorm = g.dot(&g).sqrt().max(1e-12);
            let step = 0.3 * scale.sqrt() / (gnorm * (t as f64).sqrt());
            beta.zip_mut_with(&g, |b, gc| *b -= step * gc);
            best = best.min(objective(x, y, rho, &beta));
        }
        best
    }

    #[test]
    fn beats_subgradient_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let (n, d) = (40, 5);
            let x = random_matrix(&mut rng, n, d);
            let y = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);
            let rho = 0.1;
            let fit = lasso_solve(&x, &y, rho, &opts()).unwrap();
            let mine = objective(&x, &y, rho, &fit.beta);
            let reference = subgradient_reference(&x, &y, rho, 20_000);
            assert!(mine <= reference + 1e-6, "{mine} vs {reference}");
        }
    }

    #[test]
    fn kkt_conditions_hold_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in 0..50 {
            let n = 20 + (case % 4) * 10;
            let d = 3 + case % 6;
            let x = random_matrix(&mut rng, n, d);
            let y = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);
            let rho = 0.02 + rng.random::<f64>() * 0.3;
            let fit = lasso_solve(&x, &y, rho, &opts()).unwrap();
            assert!(fit.converged, "case {case} did not converge");
            let nf = n as f64;
            let grad = (x.t().dot(&x).dot(&fit.beta) - x.t().dot(&y)) * (2.0 / nf);
            for c in 0..d {
                if fit.beta[c] == 0.0 {
                    assert!(grad[c].abs() <= rho + 1e-8, "case {case} coord {c}");
                } else {
                    assert!(
                        (grad[c] + rho * fit.beta[c].signum()).abs() <= 1e-8,
                        "case {case} coord {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn weakly_sparse_dense_solution_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = 4;
        let mut x = random_matrix(&mut rng, d, d);
        for i in 0..d {
            x[(i, i)] += 3.0;
        }
        let y = x.dot(&arr1(&[1.0, -1.0, 2.0, 0.5]));
        let fit = weakly_sparse_estimate(&x, &y, 100.0, 0.5, 0.0, &opts()).unwrap();
        assert!(fit.fill_magnitude.is_none());
        assert!(!fit.budget_exceeded);
        assert!(fit.coefficients.iter().all(|v| v.abs() > 1e-6));
    }

    #[test]
    fn weakly_sparse_fill_magnitude_from_budget() {
        // All-zero lasso solution in dimension 4 with R_q = 1, q = 0.5:
        // 4 * eps^0.5 = 1 so eps = 1/16.
        let x = Array2::eye(4);
        let y = arr1(&[0.0, 0.0, 0.0, 0.0]);
        let fit = weakly_sparse_estimate(&x, &y, 1.0, 0.5, 1.0, &opts()).unwrap();
        let eps = fit.fill_magnitude.expect("zeros must be filled");
        assert!((eps - 1.0 / 16.0).abs() < 1e-12);
        for v in fit.coefficients.iter() {
            assert!((v.abs() - eps).abs() < 1e-12);
        }
    }

    #[test]
    fn weakly_sparse_budget_respected_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let (n, d) = (30, 6);
            let x = random_matrix(&mut rng, n, d);
            let y = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);
            let radius = 0.5 + rng.random::<f64>() * 2.0;
            let q = 0.3 + rng.random::<f64>() * 0.4;
            let fit = weakly_sparse_estimate(&x, &y, radius, q, 0.05, &opts()).unwrap();
            if !fit.budget_exceeded {
                let used: f64 = fit
                    .coefficients
                    .iter()
                    .map(|v| v.abs().powf(q))
                    .sum();
                assert!(used <= radius + 1e-12);
            }
        }
    }
}

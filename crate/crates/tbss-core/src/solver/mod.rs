//! Penalized least-squares engines: the block fused lasso for candidate
//! break detection, the per-segment lasso, and their proximal building
//! blocks.

mod lasso;
mod step1;
pub mod tv1d;

pub use lasso::{
    lasso_solve, lasso_solve_gram, rho_max, weakly_sparse_estimate, LassoFit, WeaklySparseFit,
};
pub use step1::{lambda_max, solve_step1_objective, Step1Fit};
pub(crate) use step1::Step1Engine;
pub use tv1d::{anchored_fused_lasso_1d, fused_lasso_1d, soft_threshold, tv_prox};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Penalty weights of the two estimation objectives: `lambda1` on per-block
/// coefficient differences, `lambda2` on cumulative coefficient levels, and
/// `rho` on the per-segment lasso.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho: f64,
}

impl PenaltyWeights {
    pub fn new(lambda1: f64, lambda2: f64, rho: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2), ("rho", rho)] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            lambda1,
            lambda2,
            rho,
        })
    }
}

/// Step-size rule for the accelerated proximal gradient solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Fixed step 1/L with L estimated by power iteration on the per-block
    /// Gram matrices.
    FixedLipschitz,
    /// Backtracking line search (default).
    #[default]
    Backtracking,
}

/// Iteration controls shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Relative objective-decrease tolerance (proximal gradient) or KKT
    /// residual tolerance (coordinate descent).
    pub tol: f64,
    pub step_rule: StepRule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-6,
            step_rule: StepRule::Backtracking,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(Error::invalid("tol must be positive and finite"));
        }
        Ok(())
    }
}

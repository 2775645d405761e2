//! The multi-step break point detection pipeline: block fused lasso
//! candidates, K-means/BIC hard thresholding, gap-statistic clustering,
//! exhaustive refinement, per-segment sparse estimation, and optional
//! stability selection.

pub mod cluster;
pub mod refine;
pub mod segments;
pub mod stability;
pub mod threshold;
pub mod tuning;

pub use cluster::{step3_cluster, ClusterSet};
pub use refine::{step4_refine, Step4Output};
pub use segments::{step5_estimate, Step5Output};
pub use stability::{step6_stability, SegmentStability, StabilityResult};
pub use threshold::{step2_threshold, JumpProfile, Step2Output};
pub use tuning::{
    select_block_size, select_lag, tune_lambdas, TunedLambdas, TuningConfig,
};

pub(crate) use segments::segment_ranges;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{BreakPointSet, Stage, ThetaEstimate, TimeSeriesMatrix};
use crate::solver::{PenaltyWeights, Step1Engine, Step1Fit};
use crate::vargen::mix_seed;

/// Numeric zero for support decisions throughout the pipeline.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Output of the candidate identification step.
#[derive(Debug, Clone)]
pub struct Step1Output {
    pub theta: ThetaEstimate,
    pub candidates: BreakPointSet,
    pub lambda1: f64,
    pub lambda2: f64,
    pub objective: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Solves the block fused lasso at the cross-validated penalties and
/// reports every block whose coefficient change is nonzero; the candidate
/// time of block i is its start r_{i-1}.
pub fn step1_candidates(
    ts: &TimeSeriesMatrix,
    q: usize,
    tuning: &TuningConfig,
) -> Result<Step1Output> {
    let partition = tuning::detection_partition(ts, q, tuning)?;
    let tuned = tune_lambdas(ts, q, tuning)?;
    let engine = Step1Engine::new(ts, &partition, q, &[])?;
    let weights = PenaltyWeights::new(tuned.lambda1, tuned.lambda2, 0.0)?;
    let (fit, _): (Step1Fit, _) = engine.solve(&weights, &tuning.solver, None)?;
    let mut warnings = tuned.warnings;
    if !fit.converged {
        warnings.push("block fused lasso hit the iteration cap; candidates may be inexact".into());
    }
    let mut points = Vec::new();
    for (i, th) in fit.theta.thetas.iter().enumerate().skip(1) {
        // thetas[i] is block i+1 (1-based); its start is block_ends[i]
        if th.iter().any(|v| v.abs() > SUPPORT_TOL) {
            points.push(partition.block_ends[i]);
        }
    }
    Ok(Step1Output {
        theta: fit.theta,
        candidates: BreakPointSet::new(points, Stage::Candidate)?,
        lambda1: tuned.lambda1,
        lambda2: tuned.lambda2,
        objective: fit.objective,
        converged: fit.converged,
        warnings,
    })
}

/// Wall-clock milliseconds of each pipeline phase.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StepTimings {
    pub tuning_ms: f64,
    pub step1_ms: f64,
    pub step2_ms: f64,
    pub step3_ms: f64,
    pub step4_ms: f64,
    pub step5_ms: f64,
    pub step6_ms: f64,
}

impl StepTimings {
    /// Detection phase total (tuning through refinement).
    pub fn detection_ms(&self) -> f64 {
        self.tuning_ms + self.step1_ms + self.step2_ms + self.step3_ms + self.step4_ms
    }
}

/// Result of the detection phase (steps 1-4).
#[derive(Debug, Clone)]
pub struct BreakDetection {
    pub theta: ThetaEstimate,
    pub candidates: BreakPointSet,
    pub thresholded: BreakPointSet,
    pub clusters: ClusterSet,
    pub refined: BreakPointSet,
    pub jumps: JumpProfile,
    pub bic_trace: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub step1_converged: bool,
    pub timings: StepTimings,
    pub warnings: Vec<String>,
}

/// Runs steps 1-4: candidates, thresholding, clustering and refinement.
pub fn detect_breaks(
    ts: &TimeSeriesMatrix,
    q: usize,
    tuning: &TuningConfig,
) -> Result<BreakDetection> {
    let mut timings = StepTimings::default();
    let mut warnings = Vec::new();

    let t0 = Instant::now();
    let tuned = tune_lambdas(ts, q, tuning).map_err(|e| e.in_step("tuning"))?;
    timings.tuning_ms = t0.elapsed().as_secs_f64() * 1e3;

    let partition =
        tuning::detection_partition(ts, q, tuning).map_err(|e| e.in_step("step1"))?;
    let t0 = Instant::now();
    let engine = Step1Engine::new(ts, &partition, q, &[]).map_err(|e| e.in_step("step1"))?;
    let weights = PenaltyWeights::new(tuned.lambda1, tuned.lambda2, 0.0)
        .map_err(|e| e.in_step("step1"))?;
    let (fit, _) = engine
        .solve(&weights, &tuning.solver, None)
        .map_err(|e| e.in_step("step1"))?;
    warnings.extend(tuned.warnings.iter().cloned());
    if !fit.converged {
        warnings.push("block fused lasso hit the iteration cap".into());
    }
    let mut candidate_points = Vec::new();
    for (i, th) in fit.theta.thetas.iter().enumerate().skip(1) {
        // thetas[i] is block i+1 (1-based); its start is block_ends[i]
        if th.iter().any(|v| v.abs() > SUPPORT_TOL) {
            candidate_points.push(partition.block_ends[i]);
        }
    }
    let candidates = BreakPointSet::new(candidate_points, Stage::Candidate)
        .map_err(|e| e.in_step("step1"))?;
    timings.step1_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t0 = Instant::now();
    let step2 = step2_threshold(&fit.theta, ts, q, &candidates).map_err(|e| e.in_step("step2"))?;
    timings.step2_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t0 = Instant::now();
    let clusters = step3_cluster(
        &step2.survivors,
        &partition,
        ts.t_len(),
        q,
        mix_seed(tuning.seed, 3),
    )
    .map_err(|e| e.in_step("step3"))?;
    timings.step3_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t0 = Instant::now();
    let step4 = step4_refine(ts, q, &fit.theta, &clusters).map_err(|e| e.in_step("step4"))?;
    warnings.extend(step4.warnings.iter().cloned());
    timings.step4_ms = t0.elapsed().as_secs_f64() * 1e3;

    Ok(BreakDetection {
        theta: fit.theta,
        candidates,
        thresholded: step2.survivors,
        clusters,
        refined: step4.refined,
        jumps: step2.jumps,
        bic_trace: step2.bic_trace,
        lambda1: tuned.lambda1,
        lambda2: tuned.lambda2,
        step1_converged: fit.converged,
        timings,
        warnings,
    })
}

/// Stability-selection controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub n_subsamples: usize,
    pub tau: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            n_subsamples: 50,
            tau: 0.8,
        }
    }
}

/// Full pipeline configuration.
#[derive(Debug, Clone)]
pub struct DetectConfig {
    /// Lag order; ignored when `lag_max` triggers BIC selection.
    pub q: usize,
    /// When set, select the lag in 1..=lag_max by BIC before detecting.
    pub lag_max: Option<usize>,
    /// When set, run the data-driven block size search with this K.
    pub block_size_search: Option<usize>,
    pub tuning: TuningConfig,
    pub stability: Option<StabilityConfig>,
}

impl DetectConfig {
    pub fn new(q: usize, seed: u64) -> Self {
        Self {
            q,
            lag_max: None,
            block_size_search: None,
            tuning: TuningConfig::new(seed),
            stability: None,
        }
    }
}

/// Full pipeline report: every intermediate artifact plus the per-segment
/// networks and optional stability filtering.
#[derive(Debug, Clone)]
pub struct DetectionOutput {
    pub q: usize,
    pub b_t: usize,
    pub r_t: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub candidates: BreakPointSet,
    pub thresholded: BreakPointSet,
    pub clusters: ClusterSet,
    pub refined: BreakPointSet,
    pub jumps: JumpProfile,
    pub networks: crate::model::SegmentNetworkSet,
    pub segment_rhos: Vec<f64>,
    pub stability: Option<StabilityResult>,
    pub timings: StepTimings,
    pub warnings: Vec<String>,
    pub step1_converged: bool,
}

/// Composes the whole pipeline: optional lag and block size selection,
/// detection (steps 1-4), segment estimation (step 5) and optional
/// stability selection (step 6). Step errors carry the failing step's name.
pub fn detect(ts: &TimeSeriesMatrix, config: &DetectConfig) -> Result<DetectionOutput> {
    config.tuning.validate()?;
    let mut tuning = config.tuning.clone();
    let q = match config.lag_max {
        Some(d_max) => select_lag(ts, d_max, &tuning).map_err(|e| e.in_step("lag-selection"))?,
        None => config.q,
    };
    if let Some(k_steps) = config.block_size_search {
        let b = select_block_size(ts, q, k_steps, &tuning)
            .map_err(|e| e.in_step("block-size-selection"))?;
        tuning.b_t = Some(b);
    }
    let detection = detect_breaks(ts, q, &tuning)?;
    let t_len = ts.t_len();
    let b_t = tuning.block_size(t_len);
    let r_t = tuning.trim_radius(t_len);

    let t0 = Instant::now();
    let step5 = step5_estimate(ts, q, &detection.refined, r_t, &tuning.rho_grid, &tuning.solver)
        .map_err(|e| e.in_step("step5"))?;
    let mut timings = detection.timings.clone();
    timings.step5_ms = t0.elapsed().as_secs_f64() * 1e3;

    let mut warnings = detection.warnings.clone();
    if !step5.converged {
        warnings.push("segment lasso hit the iteration cap".into());
    }
    let mut networks = step5.networks;
    let stability = match config.stability {
        None => None,
        Some(sc) => {
            let t0 = Instant::now();
            let res = step6_stability(
                ts,
                q,
                &detection.refined,
                r_t,
                &tuning.rho_grid,
                sc.n_subsamples,
                sc.tau,
                mix_seed(tuning.seed, 6),
                &tuning.solver,
            )
            .map_err(|e| e.in_step("step6"))?;
            timings.step6_ms = t0.elapsed().as_secs_f64() * 1e3;
            warnings.extend(res.warnings.iter().cloned());
            let p = ts.p();
            let pq = p * q;
            networks.stability_mask = Some(res.masks_or_full(p, pq));
            Some(res)
        }
    };

    Ok(DetectionOutput {
        q,
        b_t,
        r_t,
        lambda1: detection.lambda1,
        lambda2: detection.lambda2,
        candidates: detection.candidates,
        thresholded: detection.thresholded,
        clusters: detection.clusters,
        refined: detection.refined,
        jumps: detection.jumps,
        networks,
        segment_rhos: step5.rhos,
        stability,
        timings,
        warnings,
        step1_converged: detection.step1_converged,
    })
}

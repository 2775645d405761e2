//! Break point detection and Granger causal network estimation for
//! high-dimensional piecewise vector autoregressive time series.
//!
//! The detection pipeline partitions the time axis into blocks, fits a block
//! fused lasso to locate candidate break points, screens them by
//! K-means/BIC hard thresholding, groups the survivors with the gap
//! statistic, refines one break per group by exhaustive search, re-estimates
//! the sparse VAR transition matrices on the resulting stationary segments,
//! and optionally filters the estimated networks by stability selection.
//!
//! Entry points:
//! - [`tbss::detect`] runs the full pipeline on a [`TimeSeriesMatrix`].
//! - [`vargen`] generates synthetic piecewise VAR data for benchmarking.
//! - [`eval`] scores detections against ground truth and drives replicated
//!   benchmark runs.

pub mod error;
pub mod eval;
pub mod model;
pub mod solver;
pub mod tbss;
pub mod vargen;

pub use error::{Error, Result};
pub use model::{
    lag_embed, make_partition, reconstruct_coefficients, BlockPartition, BreakPointSet,
    PiecewiseVarModel, SegmentNetworkSet, Stage, ThetaEstimate, TimeSeriesMatrix,
};

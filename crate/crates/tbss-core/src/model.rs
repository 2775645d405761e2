//! Shared domain types: observed series, piecewise VAR models, block
//! partitions and per-block coefficient estimates.
//!
//! # Time indexing
//!
//! Observations are stored 0-based as rows `x[0], ..., x[T-1]`. A break point
//! with value `t` means that `x[t]` is the first observation governed by the
//! new regime; equivalently `t` observations precede the break, so the
//! relative location is `t / T`. This matches the 1-based convention used in
//! reports, where the same value `t` reads as "the regime changes after the
//! t-th observation".

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A T x p matrix of observed time series: rows are time points, columns are
/// individual series.
#[derive(Debug, Clone)]
pub struct TimeSeriesMatrix {
    data: Array2<f64>,
    names: Option<Vec<String>>,
}

impl TimeSeriesMatrix {
    /// Validates and wraps a data matrix. Requires T >= 2, p >= 1 and all
    /// entries finite.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.nrows() < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 time points, got {}",
                data.nrows()
            )));
        }
        if data.ncols() < 1 {
            return Err(Error::invalid("need at least one series"));
        }
        if let Some(((r, c), v)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry {v} at row {r}, column {c}"
            )));
        }
        Ok(Self { data, names: None })
    }

    /// As [`TimeSeriesMatrix::new`] but keeps column names from an input file.
    pub fn with_names(data: Array2<f64>, names: Vec<String>) -> Result<Self> {
        let mut ts = Self::new(data)?;
        if names.len() != ts.p() {
            return Err(Error::invalid("column name count does not match p"));
        }
        ts.names = Some(names);
        Ok(ts)
    }

    /// Number of time points T.
    pub fn t_len(&self) -> usize {
        self.data.nrows()
    }

    /// Number of series p.
    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }
}

/// A piecewise VAR(q) model: break points plus one p x pq transition matrix
/// per stationary segment and a shared noise covariance.
#[derive(Debug, Clone)]
pub struct PiecewiseVarModel {
    pub q: usize,
    /// Strictly increasing; `break_points[j]` is the first time index of
    /// segment j+2 (see module docs).
    pub break_points: Vec<usize>,
    /// `break_points.len() + 1` matrices, each p x pq with lag-l block in
    /// columns `l*p..(l+1)*p`.
    pub transitions: Vec<Array2<f64>>,
    /// p x p symmetric positive-definite noise covariance, shared by all
    /// segments.
    pub noise_cov: Array2<f64>,
}

impl PiecewiseVarModel {
    pub fn new(
        q: usize,
        break_points: Vec<usize>,
        transitions: Vec<Array2<f64>>,
        noise_cov: Array2<f64>,
    ) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("lag order q must be positive"));
        }
        if transitions.len() != break_points.len() + 1 {
            return Err(Error::invalid(format!(
                "{} transition matrices for {} break points; need one per segment",
                transitions.len(),
                break_points.len()
            )));
        }
        if break_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("break points must be strictly increasing"));
        }
        if let Some(&b) = break_points.first() {
            if b <= q {
                return Err(Error::invalid(format!(
                    "first break point {b} must exceed the lag order {q}"
                )));
            }
        }
        let p = noise_cov.nrows();
        if noise_cov.ncols() != p {
            return Err(Error::invalid("noise covariance must be square"));
        }
        for (j, m) in transitions.iter().enumerate() {
            if m.nrows() != p || m.ncols() != p * q {
                return Err(Error::invalid(format!(
                    "transition matrix {j} has shape {:?}, expected ({p}, {})",
                    m.dim(),
                    p * q
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "transition matrix {j} has non-finite entries"
                )));
            }
        }
        for w in transitions.windows(2) {
            if w[0] == w[1] {
                return Err(Error::invalid(
                    "consecutive transition matrices are identical; no break exists there",
                ));
            }
        }
        Ok(Self {
            q,
            break_points,
            transitions,
            noise_cov,
        })
    }

    pub fn p(&self) -> usize {
        self.noise_cov.nrows()
    }

    pub fn n_segments(&self) -> usize {
        self.transitions.len()
    }

    /// Index of the segment governing observation `t`.
    pub fn segment_of(&self, t: usize) -> usize {
        self.break_points.partition_point(|&b| b <= t)
    }
}

/// Partition of the response range `[q, T)` into consecutive blocks.
///
/// `block_ends` holds `q = r_0 < r_1 < ... < r_{k_T} = T`; block `i`
/// (1-based, as in the estimation objective) covers responses
/// `[r_{i-1}, r_i)`. Interior blocks have length `b_t`; the final block
/// absorbs any remainder so that no under-sized block destabilizes the
/// per-block estimates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub b_t: usize,
    pub block_ends: Vec<usize>,
}

impl BlockPartition {
    /// Number of blocks k_T.
    pub fn k_t(&self) -> usize {
        self.block_ends.len() - 1
    }

    /// Response range `[start, end)` of 1-based block `i`.
    pub fn block_range(&self, i: usize) -> (usize, usize) {
        (self.block_ends[i - 1], self.block_ends[i])
    }

    /// 1-based index of the block containing response time `t`.
    pub fn block_of(&self, t: usize) -> usize {
        debug_assert!(t >= self.block_ends[0] && t < *self.block_ends.last().unwrap());
        match self.block_ends.binary_search(&t) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }
}

/// Builds the block partition of the response range `[q, T)`.
///
/// The final block absorbs the remainder when `b_t` does not divide `T - q`,
/// so `k_T = floor((T - q) / b_t)`.
pub fn make_partition(t_len: usize, q: usize, b_t: usize) -> Result<BlockPartition> {
    if t_len <= q {
        return Err(Error::invalid(format!(
            "series length {t_len} must exceed lag order {q}"
        )));
    }
    let span = t_len - q;
    if b_t == 0 || b_t > span {
        return Err(Error::invalid(format!(
            "block size {b_t} outside valid range 1..={span}"
        )));
    }
    let k_t = span / b_t;
    let mut block_ends = Vec::with_capacity(k_t + 1);
    for i in 0..k_t {
        block_ends.push(q + i * b_t);
    }
    block_ends.push(t_len);
    Ok(BlockPartition { b_t, block_ends })
}

/// Per-block coefficient differences from the first estimation stage.
///
/// `thetas[0]` is the base coefficient of block 1; `thetas[i]` for `i >= 1`
/// is the estimated change entering block `i+1`. The fitted coefficient of
/// block `j` is *defined* as the running sum of the first `j` entries, so
/// downstream consumers must go through [`reconstruct_coefficients`].
#[derive(Debug, Clone)]
pub struct ThetaEstimate {
    pub thetas: Vec<Array2<f64>>,
    pub partition: BlockPartition,
}

impl ThetaEstimate {
    pub fn new(thetas: Vec<Array2<f64>>, partition: BlockPartition) -> Result<Self> {
        if thetas.len() != partition.k_t() {
            return Err(Error::invalid(format!(
                "{} theta matrices for {} blocks",
                thetas.len(),
                partition.k_t()
            )));
        }
        Ok(Self { thetas, partition })
    }
}

/// Left-fold sum of the first `upto_block` coefficient differences: the
/// fitted p x pq coefficient matrix of that block.
pub fn reconstruct_coefficients(theta: &ThetaEstimate, upto_block: usize) -> Result<Array2<f64>> {
    if upto_block == 0 || upto_block > theta.thetas.len() {
        return Err(Error::invalid(format!(
            "block index {upto_block} outside 1..={}",
            theta.thetas.len()
        )));
    }
    let mut acc = theta.thetas[0].clone();
    for th in &theta.thetas[1..upto_block] {
        acc += th;
    }
    Ok(acc)
}

/// Stage of a break point set as it moves through the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Candidate,
    Thresholded,
    Clustered,
    Refined,
}

/// An ordered set of break point estimates together with its pipeline stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BreakPointSet {
    points: Vec<usize>,
    stage: Stage,
}

impl BreakPointSet {
    pub fn new(points: Vec<usize>, stage: Stage) -> Result<Self> {
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("break points must be strictly increasing"));
        }
        Ok(Self { points, stage })
    }

    pub fn empty(stage: Stage) -> Self {
        Self {
            points: Vec::new(),
            stage,
        }
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Moves to a later stage with a new point set. Stage transitions only go
    /// forward.
    pub fn advance(&self, points: Vec<usize>, stage: Stage) -> Result<Self> {
        if stage <= self.stage {
            return Err(Error::invalid(format!(
                "stage transition {:?} -> {stage:?} is not forward",
                self.stage
            )));
        }
        Self::new(points, stage)
    }
}

/// Estimated per-segment transition matrices (Granger causal networks) with
/// the trimmed sample ranges they were fitted on.
#[derive(Debug, Clone)]
pub struct SegmentNetworkSet {
    /// One p x pq matrix per segment.
    pub networks: Vec<Array2<f64>>,
    /// Response index range `[start, end)` each segment was fitted on; ranges
    /// are pairwise disjoint and ordered.
    pub segment_bounds: Vec<(usize, usize)>,
    /// Stability-selection masks, present after the optional filtering step.
    pub stability_mask: Option<Vec<Array2<bool>>>,
}

impl SegmentNetworkSet {
    pub fn new(networks: Vec<Array2<f64>>, segment_bounds: Vec<(usize, usize)>) -> Result<Self> {
        if networks.len() != segment_bounds.len() {
            return Err(Error::invalid("one bound pair per network required"));
        }
        let ordered = segment_bounds
            .windows(2)
            .all(|w| w[0].1 <= w[1].0 && w[0].0 < w[0].1);
        if !ordered || segment_bounds.iter().any(|b| b.0 >= b.1) {
            return Err(Error::invalid(
                "segment bounds must be ordered and pairwise disjoint",
            ));
        }
        Ok(Self {
            networks,
            segment_bounds,
            stability_mask: None,
        })
    }

    pub fn n_segments(&self) -> usize {
        self.networks.len()
    }
}

/// Stacks the last `q` observations ending at each admissible time into
/// pq-vectors, newest first: row `l - (q-1)` of the output is
/// `(x_l', x_{l-1}', ..., x_{l-q+1}')` for `l = q-1, ..., T-1`.
///
/// The output has `T - q + 1` rows; row `t - q` is the predictor vector for
/// response `x_t` (`t = q, ..., T-1`), and the final row is the state used to
/// forecast beyond the sample.
pub fn lag_embed(ts: &TimeSeriesMatrix, q: usize) -> Result<Array2<f64>> {
    let (t_len, p) = (ts.t_len(), ts.p());
    if q == 0 {
        return Err(Error::invalid("lag order q must be positive"));
    }
    if t_len <= q {
        return Err(Error::invalid(format!(
            "series length {t_len} must exceed lag order {q}"
        )));
    }
    let x = ts.data();
    let mut out = Array2::zeros((t_len - q + 1, p * q));
    for l in (q - 1)..t_len {
        let mut row = out.row_mut(l - (q - 1));
        for lag in 0..q {
            for j in 0..p {
                row[lag * p + j] = x[(l - lag, j)];
            }
        }
    }
    Ok(out)
}

/// Predicts the response at time `t` (i.e. `x_t`) from a p x pq coefficient
/// matrix and the lag-embedded design.
pub(crate) fn predict_row(coeffs: &Array2<f64>, embedded: &Array2<f64>, t: usize, q: usize) -> Array1<f64> {
    coeffs.dot(&embedded.row(t - q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn series(rows: Vec<Vec<f64>>) -> TimeSeriesMatrix {
        let p = rows[0].len();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        TimeSeriesMatrix::new(Array2::from_shape_vec((rows.len(), p), flat).unwrap()).unwrap()
    }

    #[test]
    fn lag_embed_identity_at_q1() {
        let ts = series(vec![vec![1.0], vec![2.0], vec![3.0]]);
        let e = lag_embed(&ts, 1).unwrap();
        assert_eq!(e, arr2(&[[1.0], [2.0], [3.0]]));
    }

    #[test]
    fn lag_embed_q2_by_hand() {
        let ts = series(vec![vec![1.0], vec![2.0], vec![3.0]]);
        let e = lag_embed(&ts, 2).unwrap();
        // Y_1 = (x_1, x_0) = (2, 1); Y_2 = (x_2, x_1) = (3, 2)
        assert_eq!(e, arr2(&[[2.0, 1.0], [3.0, 2.0]]));
    }

    #[test]
    fn lag_embed_matches_naive_indexing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data = Array2::from_shape_fn((5, 2), |_| rng.random::<f64>());
        let ts = TimeSeriesMatrix::new(data.clone()).unwrap();
        let q = 2;
        let e = lag_embed(&ts, q).unwrap();
        assert_eq!(e.nrows(), 5 - q + 1);
        // Naive double loop oracle: entry (row, lag*p + j) == x[l - lag, j].
        for l in (q - 1)..5 {
            for lag in 0..q {
                for j in 0..2 {
                    assert_eq!(e[(l - (q - 1), lag * 2 + j)], data[(l - lag, j)]);
                }
            }
        }
    }

    #[test]
    fn lag_embed_covers_each_entry_once_per_pair() {
        // Each source row j shows up exactly once per admissible (l, lag)
        // pair with l - lag = j; count occurrences and compare.
        let t_len = 7;
        let q = 3;
        let ts = series((0..t_len).map(|i| vec![(1 << i) as f64]).collect());
        let e = lag_embed(&ts, q).unwrap();
        let mut counts = vec![0usize; t_len];
        for (row, r) in e.rows().into_iter().enumerate() {
            for (lag, v) in r.iter().enumerate() {
                let l = row + q - 1;
                assert_eq!(*v, (1u64 << (l - lag)) as f64);
                counts[l - lag] += 1;
            }
        }
        for (j, &count) in counts.iter().enumerate() {
            let expected = (0..q)
                .filter(|lag| {
                    let l = j + lag;
                    l >= q - 1 && l < t_len
                })
                .count();
            assert_eq!(count, expected, "source row {j}");
        }
    }

    #[test]
    fn lag_embed_rejects_short_series() {
        let ts = series(vec![vec![1.0], vec![2.0]]);
        assert!(lag_embed(&ts, 2).is_err());
    }

    #[test]
    fn partition_flowchart_example() {
        // T=601, q=1, b_T=25: 600 responses, 24 blocks, ends 1 + 25i.
        let p = make_partition(601, 1, 25).unwrap();
        assert_eq!(p.k_t(), 24);
        for (i, &r) in p.block_ends.iter().enumerate() {
            assert_eq!(r, 1 + 25 * i);
        }
    }

    #[test]
    fn partition_single_block() {
        let p = make_partition(11, 1, 10).unwrap();
        assert_eq!(p.k_t(), 1);
        assert_eq!(p.block_ends, vec![1, 11]);
    }

    #[test]
    fn partition_lengths_sum_to_span() {
        // Sum-of-lengths oracle, including a remainder case.
        for (t_len, q, b_t) in [(100, 2, 7), (1000, 1, 31), (47, 3, 5)] {
            let p = make_partition(t_len, q, b_t).unwrap();
            let total: usize = (1..=p.k_t())
                .map(|i| {
                    let (s, e) = p.block_range(i);
                    e - s
                })
                .sum();
            assert_eq!(total, t_len - q);
            for i in 1..p.k_t() {
                let (s, e) = p.block_range(i);
                assert_eq!(e - s, b_t, "interior block {i} must have length b_T");
            }
        }
    }

    #[test]
    fn partition_rejects_bad_block_size() {
        assert!(make_partition(100, 1, 0).is_err());
        assert!(make_partition(100, 1, 100).is_err());
        assert!(make_partition(100, 99, 2).is_err());
    }

    #[test]
    fn block_of_is_consistent_with_ranges() {
        let p = make_partition(100, 2, 7).unwrap();
        for t in 2..100 {
            let i = p.block_of(t);
            let (s, e) = p.block_range(i);
            assert!(s <= t && t < e);
        }
    }

    #[test]
    fn reconstruct_first_block_is_theta1() {
        let part = make_partition(16, 1, 5).unwrap();
        let a = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let est = ThetaEstimate::new(
            vec![a.clone(), Array2::zeros((2, 2)), Array2::zeros((2, 2))],
            part,
        )
        .unwrap();
        assert_eq!(reconstruct_coefficients(&est, 1).unwrap(), a);
        // Zero increments: block 3 reconstruction still equals A.
        assert_eq!(reconstruct_coefficients(&est, 3).unwrap(), a);
    }

    #[test]
    fn reconstruct_matches_naive_fold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let part = make_partition(26, 1, 5).unwrap();
        let thetas: Vec<Array2<f64>> = (0..5)
            .map(|_| Array2::from_shape_fn((2, 2), |_| rng.random::<f64>() - 0.5))
            .collect();
        let est = ThetaEstimate::new(thetas.clone(), part).unwrap();
        for upto in 1..=5 {
            let mut naive = Array2::<f64>::zeros((2, 2));
            for th in &thetas[..upto] {
                naive = naive + th;
            }
            let got = reconstruct_coefficients(&est, upto).unwrap();
            for (g, n) in got.iter().zip(naive.iter()) {
                assert!((g - n).abs() < 1e-12);
            }
        }
        assert!(reconstruct_coefficients(&est, 0).is_err());
        assert!(reconstruct_coefficients(&est, 6).is_err());
    }

    #[test]
    fn break_point_set_enforces_order_and_stage() {
        assert!(BreakPointSet::new(vec![5, 5], Stage::Candidate).is_err());
        let c = BreakPointSet::new(vec![5, 9], Stage::Candidate).unwrap();
        let t = c.advance(vec![9], Stage::Thresholded).unwrap();
        assert!(t.advance(vec![9], Stage::Candidate).is_err());
        assert!(t.advance(vec![9], Stage::Refined).is_ok());
    }

    #[test]
    fn model_validation() {
        let eye = Array2::eye(2);
        let a = arr2(&[[0.5, 0.0], [0.0, 0.5]]);
        let b = arr2(&[[-0.5, 0.0], [0.0, -0.5]]);
        assert!(PiecewiseVarModel::new(1, vec![10], vec![a.clone(), b.clone()], eye.clone()).is_ok());
        // identical consecutive transitions rejected
        assert!(PiecewiseVarModel::new(1, vec![10], vec![a.clone(), a.clone()], eye.clone()).is_err());
        // break at or below q rejected
        assert!(PiecewiseVarModel::new(1, vec![1], vec![a.clone(), b.clone()], eye.clone()).is_err());
        // wrong transition count
        assert!(PiecewiseVarModel::new(1, vec![10, 20], vec![a, b], eye).is_err());
    }

    #[test]
    fn segment_of_uses_first_new_index_convention() {
        let eye = Array2::eye(1);
        let m = PiecewiseVarModel::new(
            1,
            vec![10, 20],
            vec![arr2(&[[0.1]]), arr2(&[[0.2]]), arr2(&[[0.3]])],
            eye,
        )
        .unwrap();
        assert_eq!(m.segment_of(9), 0);
        assert_eq!(m.segment_of(10), 1);
        assert_eq!(m.segment_of(19), 1);
        assert_eq!(m.segment_of(20), 2);
    }

    #[test]
    fn time_series_rejects_non_finite() {
        let bad = Array2::from_shape_vec((2, 2), vec![1.0, f64::NAN, 0.0, 1.0]).unwrap();
        assert!(TimeSeriesMatrix::new(bad).is_err());
    }
}

//! Grouping of surviving candidate break points: exact 1-D k-means plus the
//! gap statistic for choosing the number of clusters, and the search
//! intervals handed to the exhaustive refinement step.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlockPartition, BreakPointSet};
use crate::vargen::mix_seed;

/// Reference-set count of the gap statistic.
const GAP_REFERENCES: usize = 50;
/// Cap on the number of clusters considered.
const MAX_CLUSTERS: usize = 10;

/// Clusters of candidate break points with their refinement search
/// intervals and the boundary blocks used for the local estimators.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ClusterSet {
    /// Candidate time points per cluster, ordered by position.
    pub clusters: Vec<Vec<usize>>,
    /// 1-based block indices of each cluster's candidates.
    pub block_clusters: Vec<Vec<usize>>,
    /// Half-open refinement windows (l_i, u_i), clamped to the valid
    /// response range.
    pub search_intervals: Vec<(usize, usize)>,
    /// Boundary block indices w_1 ... w_{m+1}: the block whose running-sum
    /// coefficient serves as the local estimate between clusters i-1 and i.
    pub midpoints: Vec<usize>,
    /// Cluster count proposed by the gap statistic, kept for the audit
    /// trail (the structural linkage bound takes precedence).
    pub gap_k: usize,
}

impl ClusterSet {
    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Exact 1-D k-means on sorted values by dynamic programming (optimal
/// clusters of a 1-D set are contiguous in sorted order). Returns the
/// within-cluster sum of squares and the group boundaries.
pub(crate) fn kmeans_1d(sorted: &[f64], k: usize) -> (f64, Vec<usize>) {
    let n = sorted.len();
    assert!(k >= 1 && k <= n);
    let mut prefix = vec![0.0; n + 1];
    let mut prefix_sq = vec![0.0; n + 1];
    for (i, &v) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
        prefix_sq[i + 1] = prefix_sq[i] + v * v;
    }
    // within-SS of the sorted slice [a, b)
    let cost = |a: usize, b: usize| -> f64 {
        let n = (b - a) as f64;
        let s = prefix[b] - prefix[a];
        (prefix_sq[b] - prefix_sq[a] - s * s / n).max(0.0)
    };
    let inf = f64::INFINITY;
    // dp[c][i]: best cost of splitting the first i points into c clusters
    let mut dp = vec![vec![inf; n + 1]; k + 1];
    let mut arg = vec![vec![0usize; n + 1]; k + 1];
    dp[0][0] = 0.0;
    for c in 1..=k {
        for i in c..=n {
            for j in (c - 1)..i {
                let v = dp[c - 1][j] + cost(j, i);
                if v < dp[c][i] {
                    dp[c][i] = v;
                    arg[c][i] = j;
                }
            }
        }
    }
    let mut boundaries = vec![n];
    let mut i = n;
    for c in (1..=k).rev() {
        i = arg[c][i];
        boundaries.push(i);
    }
    boundaries.reverse();
    (dp[k][n], boundaries)
}

/// Pooled within-cluster dispersion for k clusters (exact).
fn dispersion(sorted: &[f64], k: usize) -> f64 {
    kmeans_1d(sorted, k).0
}

/// Gap statistic choice of the cluster count: compares log dispersion
/// against uniform reference draws over the candidate range and picks the
/// smallest k with `Gap(k) >= Gap(k+1) - s_{k+1}`.
fn gap_statistic_k(points: &[f64], k_max: usize, seed: u64) -> usize {
    let n = points.len();
    if n <= 1 || k_max <= 1 {
        return 1;
    }
    let lo = points[0];
    let hi = points[n - 1];
    if hi <= lo {
        return 1;
    }
    let log_w: Vec<f64> = (1..=k_max)
        .map(|k| dispersion(points, k).max(1e-12).ln())
        .collect();
    let mut ref_log_w = vec![vec![0.0; GAP_REFERENCES]; k_max];
    for b in 0..GAP_REFERENCES {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, b as u64));
        let mut sample: Vec<f64> = (0..n).map(|_| lo + rng.random::<f64>() * (hi - lo)).collect();
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in 1..=k_max {
            ref_log_w[k - 1][b] = dispersion(&sample, k).max(1e-12).ln();
        }
    }
    let gap: Vec<f64> = (0..k_max)
        .map(|ki| ref_log_w[ki].iter().sum::<f64>() / GAP_REFERENCES as f64 - log_w[ki])
        .collect();
    let s: Vec<f64> = (0..k_max)
        .map(|ki| {
            let mean = ref_log_w[ki].iter().sum::<f64>() / GAP_REFERENCES as f64;
            let var = ref_log_w[ki]
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / GAP_REFERENCES as f64;
            var.sqrt() * (1.0 + 1.0 / GAP_REFERENCES as f64).sqrt()
        })
        .collect();
    if std::env::var_os("TBSS_DUMP_GAP").is_some() {
        eprintln!("gap points={points:?}");
        eprintln!("gap values={gap:?}");
        eprintln!("gap s={s:?}");
    }
    for k in 1..k_max {
        if gap[k - 1] >= gap[k] - s[k] {
            return k;
        }
    }
    k_max
}

/// Groups the surviving candidate points into clusters and derives the
/// per-cluster search intervals: a singleton cluster searches
/// `(c - b_T, c + b_T)`, a wider cluster searches `(min C, max C)`; both
/// are clamped to the valid response range. Boundary blocks `w_i` are the
/// rounded block-index midpoints between consecutive clusters (with the
/// first and last block as virtual neighbours).
///
/// The cluster count combines the gap statistic with a structural bound:
/// one break can only activate adjacent blocks, so candidates more than
/// two block lengths apart cannot stem from the same break, and splitting
/// candidates within that span yields refined points closer than the
/// step-5 trimming radius. Single-linkage components at gap 2*b_T + 1
/// therefore fix the count; the gap statistic's proposal is recorded for
/// the audit trail.
pub fn step3_cluster(
    survivors: &BreakPointSet,
    partition: &BlockPartition,
    t_len: usize,
    q: usize,
    seed: u64,
) -> Result<ClusterSet> {
    if survivors.is_empty() {
        return Ok(ClusterSet::default());
    }
    let points = survivors.points();
    let values: Vec<f64> = points.iter().map(|&t| t as f64).collect();
    let k_max = points.len().min(MAX_CLUSTERS);
    let gap_k = gap_statistic_k(&values, k_max, mix_seed(seed, 0x6a70));
    let link = 2 * partition.b_t + 1;
    let components = 1 + points.windows(2).filter(|w| w[1] - w[0] > link).count();
    let k = components.min(k_max);
    let (_, boundaries) = if k == components {
        // boundaries directly from the linkage gaps
        let mut bounds = vec![0];
        for (idx, w) in points.windows(2).enumerate() {
            if w[1] - w[0] > link {
                bounds.push(idx + 1);
            }
        }
        bounds.push(points.len());
        (0.0, bounds)
    } else {
        kmeans_1d(&values, k)
    };
    let b_t = partition.b_t;
    let mut out = ClusterSet::default();
    for w in boundaries.windows(2) {
        let members: Vec<usize> = points[w[0]..w[1]].to_vec();
        let blocks: Vec<usize> = members
            .iter()
            .map(|&t| match partition.block_ends.binary_search(&t) {
                Ok(pos) => pos + 1,
                Err(pos) => pos, // interior time: block that contains it
            })
            .collect();
        let (lo, hi) = if members.len() == 1 {
            let c = members[0];
            (c.saturating_sub(b_t), c + b_t)
        } else {
            (members[0], *members.last().unwrap())
        };
        let lo = lo.max(q.saturating_sub(1)).max(1);
        let hi = hi.min(t_len - 1);
        out.clusters.push(members);
        out.block_clusters.push(blocks);
        out.search_intervals.push((lo, hi));
    }
    // boundary blocks w_i between consecutive clusters, with J_0 = {1} and
    // J_{m+1} = {k_T}
    let k_t = partition.k_t();
    let m = out.clusters.len();
    for i in 0..=m {
        let left = if i == 0 {
            1
        } else {
            *out.block_clusters[i - 1].last().unwrap()
        };
        let right = if i == m {
            k_t
        } else {
            out.block_clusters[i][0]
        };
        let mid = (left as f64 + right as f64) / 2.0;
        let w = mid.round().clamp(1.0, k_t as f64) as usize;
        out.midpoints.push(w);
    }
    out.gap_k = gap_k;
    Ok(out)
}

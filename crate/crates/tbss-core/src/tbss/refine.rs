//! Exhaustive single-break refinement inside each cluster's search
//! interval, using the local running-sum coefficient estimates on either
//! side.

use crate::error::Result;
use crate::model::{
    lag_embed, reconstruct_coefficients, BreakPointSet, Stage, ThetaEstimate, TimeSeriesMatrix,
};
use crate::tbss::cluster::ClusterSet;

/// Output of the refinement step.
#[derive(Debug, Clone)]
pub struct Step4Output {
    pub refined: BreakPointSet,
    /// Minimized two-sided squared error per kept cluster.
    pub sse: Vec<f64>,
    pub warnings: Vec<String>,
}

/// For each cluster, scans every admissible split point in its search
/// interval and keeps the one minimizing the two-sided residual sum (old
/// local coefficient before the split, new one after). The scan uses
/// prefix sums of the two residual sequences, so each interval costs one
/// pass. The returned points follow the "first index of the new regime"
/// convention (scan split s maps to break s + 1).
pub fn step4_refine(
    ts: &TimeSeriesMatrix,
    q: usize,
    theta: &ThetaEstimate,
    clusters: &ClusterSet,
) -> Result<Step4Output> {
    if clusters.is_empty() {
        return Ok(Step4Output {
            refined: BreakPointSet::empty(Stage::Refined),
            sse: Vec::new(),
            warnings: Vec::new(),
        });
    }
    let embedded = lag_embed(ts, q)?;
    let x = ts.data();
    let p = ts.p();
    let mut refined = Vec::new();
    let mut sse_out = Vec::new();
    let mut warnings = Vec::new();
    for (ci, &(l, u)) in clusters.search_intervals.iter().enumerate() {
        // keep consecutive intervals disjoint so refined points stay ordered
        let l = if ci > 0 {
            l.max(*clusters.clusters[ci - 1].last().unwrap())
        } else {
            l
        };
        let u = if ci + 1 < clusters.clusters.len() {
            u.min(clusters.clusters[ci + 1][0])
        } else {
            u
        };
        if u <= l + 1 {
            warnings.push(format!(
                "cluster {} has an empty search interval ({l}, {u}); dropped",
                ci + 1
            ));
            continue;
        }
        let pre = reconstruct_coefficients(theta, clusters.midpoints[ci])?;
        let post = reconstruct_coefficients(theta, clusters.midpoints[ci + 1])?;
        // residuals of predicting x_{t+1} from Y_t under each local model,
        // for t in [l, u)
        let width = u - l;
        let mut prefix_pre = vec![0.0; width + 1];
        let mut prefix_post = vec![0.0; width + 1];
        for (idx, t) in (l..u).enumerate() {
            let design = embedded.row(t - (q - 1));
            let pred_pre = pre.dot(&design);
            let pred_post = post.dot(&design);
            let mut e_pre = 0.0;
            let mut e_post = 0.0;
            for j in 0..p {
                let truth = x[(t + 1, j)];
                e_pre += (truth - pred_pre[j]) * (truth - pred_pre[j]);
                e_post += (truth - pred_post[j]) * (truth - pred_post[j]);
            }
            prefix_pre[idx + 1] = prefix_pre[idx] + e_pre;
            prefix_post[idx + 1] = prefix_post[idx] + e_post;
        }
        let mut best = (f64::INFINITY, l + 1);
        for s in (l + 1)..u {
            let idx = s - l;
            let sse = prefix_pre[idx] + (prefix_post[width] - prefix_post[idx]);
            if sse < best.0 {
                best = (sse, s);
            }
        }
        refined.push(best.1 + 1);
        sse_out.push(best.0);
    }
    // drop later duplicates if interval clamping still produced a collision
    let mut deduped = Vec::with_capacity(refined.len());
    let mut sse_kept = Vec::new();
    for (i, &r) in refined.iter().enumerate() {
        if deduped.last().map_or(true, |&prev| r > prev) {
            deduped.push(r);
            sse_kept.push(sse_out[i]);
        } else {
            warnings.push(format!(
                "refined point {r} collides with its predecessor; dropped"
            ));
        }
    }
    Ok(Step4Output {
        refined: BreakPointSet::new(deduped, Stage::Refined)?,
        sse: sse_kept,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_partition, TimeSeriesMatrix};
    use ndarray::{arr2, Array2};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle: evaluates the two-sided SSE of every split from
    /// scratch with fresh sums.
    fn brute_force_split(
        ts: &TimeSeriesMatrix,
        q: usize,
        pre: &Array2<f64>,
        post: &Array2<f64>,
        l: usize,
        u: usize,
    ) -> usize {
        let embedded = lag_embed(ts, q).unwrap();
        let x = ts.data();
        let p = ts.p();
        let mut best = (f64::INFINITY, 0);
        for s in (l + 1)..u {
            let mut sse = 0.0;
            for t in l..u {
                let coeff = if t < s { pre } else { post };
                let pred = coeff.dot(&embedded.row(t - (q - 1)));
                for j in 0..p {
                    let r = x[(t + 1, j)] - pred[j];
                    sse += r * r;
                }
            }
            if sse < best.0 {
                best = (sse, s);
            }
        }
        best.1
    }

    fn cluster_for(theta_blocks: usize, members: Vec<usize>, l: usize, u: usize) -> ClusterSet {
        ClusterSet {
            clusters: vec![members.clone()],
            block_clusters: vec![members.iter().map(|_| 2).collect()],
            search_intervals: vec![(l, u)],
            midpoints: vec![1, theta_blocks],
            gap_k: 1,
        }
    }

    #[test]
    fn refine_matches_brute_force_oracle() {
        // univariate AR with an exact switch; local coefficients supplied
        // exactly through the theta running sums
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in 0..50 {
            let t_len = 80;
            let beta = 30 + (case % 20); // true first index of new regime
            let mut x = Array2::<f64>::zeros((t_len, 1));
            x[(0, 0)] = 1.0;
            for t in 1..t_len {
                let phi = if t >= beta { -0.7 } else { 0.7 };
                x[(t, 0)] = phi * x[(t - 1, 0)] + 0.2 * (rng.random::<f64>() - 0.5);
            }
            let ts = TimeSeriesMatrix::new(x).unwrap();
            let partition = make_partition(t_len, 1, 10).unwrap();
            let k_t = partition.k_t();
            let mut thetas = vec![Array2::<f64>::zeros((1, 1)); k_t];
            thetas[0][(0, 0)] = 0.7;
            let change_block = partition.block_of(beta);
            thetas[change_block - 1][(0, 0)] = -1.4;
            let theta = ThetaEstimate::new(thetas, partition.clone()).unwrap();
            let clusters = cluster_for(k_t, vec![partition.block_ends[change_block - 1]], beta - 12, beta + 12);
            let out = step4_refine(&ts, 1, &theta, &clusters).unwrap();
            let pre = reconstruct_coefficients(&theta, 1).unwrap();
            let post = reconstruct_coefficients(&theta, k_t).unwrap();
            let oracle = brute_force_split(&ts, 1, &pre, &post, beta - 12, beta + 12);
            assert_eq!(out.refined.points()[0], oracle + 1, "case {case}");
        }
    }

    #[test]
    fn refine_finds_exact_switch_noiseless() {
        // piecewise AR(1) with zero noise: the SSE is exactly zero at the
        // true split and positive elsewhere
        let t_len = 60;
        let beta = 30;
        let mut x = Array2::<f64>::zeros((t_len, 1));
        x[(0, 0)] = 1.0;
        for t in 1..t_len {
            let phi = if t >= beta { -0.5 } else { 0.9 };
            x[(t, 0)] = phi * x[(t - 1, 0)];
        }
        let ts = TimeSeriesMatrix::new(x).unwrap();
        let partition = make_partition(t_len, 1, 10).unwrap();
        let k_t = partition.k_t();
        let mut thetas = vec![Array2::<f64>::zeros((1, 1)); k_t];
        thetas[0][(0, 0)] = 0.9;
        thetas[2][(0, 0)] = -1.4;
        let theta = ThetaEstimate::new(thetas, partition).unwrap();
        let clusters = cluster_for(k_t, vec![21], 18, 42);
        let out = step4_refine(&ts, 1, &theta, &clusters).unwrap();
        assert_eq!(out.refined.points(), &[beta]);
        assert!(out.sse[0] < 1e-20);
    }

    #[test]
    fn width_one_interval_returns_only_interior_point() {
        let ts = TimeSeriesMatrix::new(arr2(&[[1.0], [2.0], [1.5], [2.5], [1.0], [2.0]])).unwrap();
        let partition = make_partition(6, 1, 2).unwrap();
        let thetas = vec![Array2::from_elem((1, 1), 0.1); partition.k_t()];
        let theta = ThetaEstimate::new(thetas, partition).unwrap();
        let clusters = cluster_for(2, vec![3], 2, 4);
        let out = step4_refine(&ts, 1, &theta, &clusters).unwrap();
        assert_eq!(out.refined.points(), &[4]); // only interior split s=3
    }

    #[test]
    fn empty_interval_drops_cluster_with_warning() {
        let ts = TimeSeriesMatrix::new(arr2(&[[1.0], [2.0], [1.5], [2.5], [1.0], [2.0]])).unwrap();
        let partition = make_partition(6, 1, 2).unwrap();
        let thetas = vec![Array2::from_elem((1, 1), 0.1); partition.k_t()];
        let theta = ThetaEstimate::new(thetas, partition).unwrap();
        let clusters = cluster_for(2, vec![3], 3, 4);
        let out = step4_refine(&ts, 1, &theta, &clusters).unwrap();
        assert!(out.refined.is_empty());
        assert_eq!(out.warnings.len(), 1);
    }
}

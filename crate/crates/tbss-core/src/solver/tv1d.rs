//! Exact 1-D total variation and sparse fused lasso proximal operators.
//!
//! `tv_prox` is a direct O(n) taut-string style solver (Condat's algorithm).
//! The sparse fused lasso prox then follows from the classical decomposition:
//! solve the pure TV problem, then soft-threshold coordinatewise. The
//! `anchored` variants additionally penalize the *level* of the first entry
//! with the fusion weight, i.e. they treat the sequence as preceded by a
//! fixed zero; this is the per-trajectory penalty induced by the block
//! estimation objective, where the first block's coefficient is itself a
//! "difference from zero".

/// sign(x) * max(|x| - lam, 0)
pub fn soft_threshold(x: f64, lam: f64) -> f64 {
    if x > lam {
        x - lam
    } else if x < -lam {
        x + lam
    } else {
        0.0
    }
}

/// Exact minimizer of `0.5 * ||z - y||^2 + lam * sum_i |z_{i+1} - z_i|`.
pub fn tv_prox(y: &[f64], lam: f64) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    if n == 1 || lam <= 0.0 {
        out.copy_from_slice(y);
        return out;
    }

    let (mut k, mut k0, mut kminus, mut kplus) = (0usize, 0usize, 0usize, 0usize);
    let mut umin = lam;
    let mut umax = -lam;
    let mut vmin = y[0] - lam;
    let mut vmax = y[0] + lam;
    let two_lam = 2.0 * lam;

    loop {
        while k == n - 1 {
            if umin < 0.0 {
                // the tube forces a downward jump at the end of this segment
                loop {
                    out[k0] = vmin;
                    k0 += 1;
                    if k0 > kminus {
                        break;
                    }
                }
                k = k0;
                kminus = k;
                vmin = y[k];
                umin = lam;
                umax = vmin + lam - vmax;
            } else if umax > 0.0 {
                loop {
                    out[k0] = vmax;
                    k0 += 1;
                    if k0 > kplus {
                        break;
                    }
                }
                k = k0;
                kplus = k;
                vmax = y[k];
                umax = -lam;
                umin = vmax - lam - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                loop {
                    out[k0] = vmin;
                    k0 += 1;
                    if k0 > k {
                        break;
                    }
                }
                return out;
            }
        }

        umin += y[k + 1] - vmin;
        if umin < -lam {
            // negative jump: commit the current segment at vmin
            loop {
                out[k0] = vmin;
                k0 += 1;
                if k0 > kminus {
                    break;
                }
            }
            k = k0;
            kminus = k;
            kplus = k;
            vmin = y[k];
            vmax = vmin + two_lam;
            umin = lam;
            umax = -lam;
        } else {
            umax += y[k + 1] - vmax;
            if umax > lam {
                // positive jump: commit the current segment at vmax
                loop {
                    out[k0] = vmax;
                    k0 += 1;
                    if k0 > kplus {
                        break;
                    }
                }
                k = k0;
                kminus = k;
                kplus = k;
                vmax = y[k];
                vmin = vmax - two_lam;
                umin = lam;
                umax = -lam;
            } else {
                // no jump: extend the segment, keeping the string taut
                k += 1;
                if umin >= lam {
                    vmin += (umin - lam) / (k - k0 + 1) as f64;
                    umin = lam;
                    kminus = k;
                }
                if umax <= -lam {
                    vmax += (umax + lam) / (k - k0 + 1) as f64;
                    umax = -lam;
                    kplus = k;
                }
            }
        }
    }
}

/// Exact minimizer of
/// `0.5 * ||z - y||^2 + lam * (|z_1| + sum_{i>=2} |z_i - z_{i-1}|)`,
/// i.e. TV with the sequence anchored to a fixed leading zero.
///
/// Reduction: solve the plain TV problem on the antisymmetric extension
/// `(-y_n, ..., -y_1, y_1, ..., y_n)`. Its objective is invariant under the
/// antisymmetry map and strictly convex, so the unique minimizer is itself
/// antisymmetric, the middle difference contributes `2*lam*|z_1|`, and the
/// restriction to the second half solves the anchored problem.
pub fn anchored_tv_prox(y: &[f64], lam: f64) -> Vec<f64> {
    let n = y.len();
    if n == 0 {
        return Vec::new();
    }
    if lam <= 0.0 {
        return y.to_vec();
    }
    let mut ext = Vec::with_capacity(2 * n);
    for &v in y.iter().rev() {
        ext.push(-v);
    }
    ext.extend_from_slice(y);
    let sol = tv_prox(&ext, lam);
    sol[n..].to_vec()
}

/// Exact prox of the sparse fused lasso penalty
/// `lam_fuse * sum_{i>=2} |z_i - z_{i-1}| + lam_level * sum_i |z_i|`:
/// TV solve followed by coordinatewise soft-thresholding.
pub fn fused_lasso_1d(y: &[f64], lam_fuse: f64, lam_level: f64) -> Vec<f64> {
    let mut z = tv_prox(y, lam_fuse);
    if lam_level > 0.0 {
        for v in z.iter_mut() {
            *v = soft_threshold(*v, lam_level);
        }
    }
    z
}

/// As [`fused_lasso_1d`] but with the anchored fusion penalty
/// `lam_fuse * (|z_1| + sum_{i>=2} |z_i - z_{i-1}|)`.
pub fn anchored_fused_lasso_1d(y: &[f64], lam_fuse: f64, lam_level: f64) -> Vec<f64> {
    let mut z = anchored_tv_prox(y, lam_fuse);
    if lam_level > 0.0 {
        for v in z.iter_mut() {
            *v = soft_threshold(*v, lam_level);
        }
    }
    z
}

/// Exact minimizer of
/// `0.5 * ||z - y||^2 + sum_i w_i |z_{i+1} - z_i|`
/// with a separate nonnegative weight per difference (`w.len() == n - 1`).
///
/// Dynamic-programming message passing: the derivative of the running
/// message is piecewise linear and nondecreasing, stored as knot-wise
/// slope/intercept increments; each step clips it to `[-w_i, w_i]`
/// (recording the clip knots) and adds the next quadratic's derivative.
/// The solution is recovered by backward clamping to the recorded knots.
/// O(n) amortized.
pub fn weighted_tv_prox(y: &[f64], w: &[f64]) -> Vec<f64> {
    let n = y.len();
    assert_eq!(w.len(), n.saturating_sub(1), "need one weight per difference");
    let mut beta = vec![0.0; n];
    if n == 0 {
        return beta;
    }
    if n == 1 {
        beta[0] = y[0];
        return beta;
    }
    // knot positions and the slope/intercept increments they contribute
    // when sweeping from the left; (afirst, bfirst) is the leftmost piece
    // and (alast, blast) the negated rightmost piece for right-side sweeps
    let mut x = vec![0.0; 2 * n];
    let mut a = vec![0.0; 2 * n];
    let mut b = vec![0.0; 2 * n];
    let mut tm = vec![0.0; n - 1];
    let mut tp = vec![0.0; n - 1];

    tm[0] = y[0] - w[0];
    tp[0] = y[0] + w[0];
    let mut l = n - 1;
    let mut r = n;
    x[l] = tm[0];
    x[r] = tp[0];
    a[l] = 1.0;
    b[l] = -y[0] + w[0];
    a[r] = -1.0;
    b[r] = y[0] + w[0];
    let mut afirst = 1.0;
    let mut bfirst = -w[0] - y[1];
    let mut alast = -1.0;
    let mut blast = -w[0] + y[1];

    for k in 1..(n - 1) {
        let wk = w[k].max(0.0);
        // sweep up from the left until the derivative exceeds -wk
        let mut alo = afirst;
        let mut blo = bfirst;
        let mut lo = l;
        while lo <= r {
            if alo * x[lo] + blo > -wk {
                break;
            }
            alo += a[lo];
            blo += b[lo];
            lo += 1;
        }
        // sweep down from the right until the derivative drops below wk
        let mut ahi = alast;
        let mut bhi = blast;
        let mut hi = r;
        while hi >= lo {
            if -(ahi * x[hi] + bhi) < wk {
                break;
            }
            ahi += a[hi];
            bhi += b[hi];
            if hi == 0 {
                break;
            }
            hi -= 1;
        }
        tm[k] = (-wk - blo) / alo;
        l = lo - 1;
        x[l] = tm[k];
        tp[k] = (wk + bhi) / (-ahi);
        r = hi + 1;
        x[r] = tp[k];
        a[l] = alo;
        b[l] = blo + wk;
        a[r] = ahi;
        b[r] = bhi + wk;
        afirst = 1.0;
        bfirst = -wk - y[k + 1];
        alast = -1.0;
        blast = -wk + y[k + 1];
    }

    // minimize the final message: walk to the zero crossing
    let mut alo = afirst;
    let mut blo = bfirst;
    let mut lo = l;
    while lo <= r {
        if alo * x[lo] + blo > 0.0 {
            break;
        }
        alo += a[lo];
        blo += b[lo];
        lo += 1;
    }
    beta[n - 1] = -blo / alo;
    for k in (0..(n - 1)).rev() {
        beta[k] = if beta[k + 1] > tp[k] {
            tp[k]
        } else if beta[k + 1] < tm[k] {
            tm[k]
        } else {
            beta[k + 1]
        };
    }
    beta
}

/// Weighted fusion plus a uniform level penalty: weighted TV solve, then
/// coordinatewise soft-thresholding (exact, by the same certificate
/// argument as the uniform case).
pub fn weighted_fused_lasso_1d(y: &[f64], w: &[f64], lam_level: f64) -> Vec<f64> {
    let mut z = weighted_tv_prox(y, w);
    if lam_level > 0.0 {
        for v in z.iter_mut() {
            *v = soft_threshold(*v, lam_level);
        }
    }
    z
}

/// Objective value of the (optionally anchored) sparse fused lasso prox
/// problem; shared by the solver tests and the line search.
pub fn fused_objective(y: &[f64], z: &[f64], lam_fuse: f64, lam_level: f64, anchored: bool) -> f64 {
    let mut obj = 0.0;
    for (zi, yi) in z.iter().zip(y) {
        obj += 0.5 * (zi - yi) * (zi - yi) + lam_level * zi.abs();
    }
    if anchored {
        obj += lam_fuse * z[0].abs();
    }
    for w in z.windows(2) {
        obj += lam_fuse * (w[1] - w[0]).abs();
    }
    obj
}

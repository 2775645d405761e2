use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// replicate the gap computation for the failing survivor set
fn kmeans_1d(sorted: &[f64], k: usize) -> f64 {
    let n = sorted.len();
    let mut prefix = vec![0.0; n + 1];
    let mut prefix_sq = vec![0.0; n + 1];
    for (i, &v) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
        prefix_sq[i + 1] = prefix_sq[i] + v * v;
    }
    let cost = |a: usize, b: usize| -> f64 {
        let n = (b - a) as f64;
        let s = prefix[b] - prefix[a];
        (prefix_sq[b] - prefix_sq[a] - s * s / n).max(0.0)
    };
    let inf = f64::INFINITY;
    let mut dp = vec![vec![inf; n + 1]; k + 1];
    dp[0][0] = 0.0;
    for c in 1..=k {
        for i in c..=n {
            for j in (c - 1)..i {
                let v = dp[c - 1][j] + cost(j, i);
                if v < dp[c][i] { dp[c][i] = v; }
            }
        }
    }
    dp[k][n]
}

fn main() {
    let pts: Vec<f64> = vec![311., 342., 373., 404., 652., 683., 714., 745., 838., 869., 931.];
    let (lo, hi) = (311.0, 931.0);
    let n = pts.len();
    let k_max = 10.min(n);
    let b_refs = 50;
    let log_w: Vec<f64> = (1..=k_max).map(|k| kmeans_1d(&pts, k).max(1e-12).ln()).collect();
    let mut gap = vec![0.0; k_max];
    let mut s = vec![0.0; k_max];
    for ki in 0..k_max {
        let mut refs = vec![];
        for b in 0..b_refs {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + b);
            let mut sample: Vec<f64> = (0..n).map(|_| lo + rng.random::<f64>() * (hi - lo)).collect();
            sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
            refs.push(kmeans_1d(&sample, ki + 1).max(1e-12).ln());
        }
        let mean = refs.iter().sum::<f64>() / b_refs as f64;
        let var = refs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / b_refs as f64;
        gap[ki] = mean - log_w[ki];
        s[ki] = var.sqrt() * (1.0 + 1.0 / b_refs as f64).sqrt();
    }
    for k in 1..=k_max {
        println!("k={k} logW={:.3} gap={:.3} s={:.3}", log_w[k-1], gap[k-1], s[k-1]);
    }
    for k in 1..k_max {
        if gap[k - 1] >= gap[k] - s[k] {
            println!("rule picks k={k}");
            break;
        }
    }
}

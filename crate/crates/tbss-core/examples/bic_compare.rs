use ndarray::{Array1, Array2};
use tbss_core::eval::*;
use tbss_core::model::*;
use tbss_core::solver::*;
use tbss_core::vargen::*;

// Recompute segment fits on E.1 with fixed true breaks, comparing rho
// selection flavors on the first segment.
fn main() {
    let (series, _spec, model) = generate_scenario("E.1", replicate_seed(42, 0)).unwrap();
    let truth = model.as_linear().unwrap();
    let embedded = lag_embed(&series, 1).unwrap();
    let x = series.data();
    let (p, pq) = (20, 20);
    // segment 1 with r_t = 31: responses [1, 333-31) = [1, 302)
    let (lo, hi) = (1usize, 302usize);
    let nf = (hi - lo) as f64;
    let mut gram = Array2::<f64>::zeros((pq, pq));
    let mut corr = Array2::<f64>::zeros((pq, p));
    let mut sq = vec![0.0; p];
    for m in lo..hi {
        let row = embedded.row(m - 1);
        for a in 0..pq {
            for b in 0..pq { gram[(a,b)] += row[a]*row[b]; }
            for c in 0..p { corr[(a,c)] += row[a]*x[(m,c)]; }
        }
        for c in 0..p { sq[c] += x[(m,c)]*x[(m,c)]; }
    }
    let gram_n = &gram / nf;
    let rho_top = (0..p).map(|c| rho_max(&(corr.column(c).to_owned()/nf))).fold(0.0_f64, f64::max);
    let opts = SolverOptions::default();
    let truth_m = &truth.transitions[0];
    println!("mult | nnz | SEN SPC | RE_lasso | RE_refit | bic_plain | bic_refit");
    for gi in 0..12 {
        let mult = (1e-3_f64).powf(gi as f64 / 11.0);
        let rho = mult * rho_top;
        let mut net = Array2::<f64>::zeros((p, pq));
        let mut net_refit = Array2::<f64>::zeros((p, pq));
        let mut rss_lasso = 0.0; let mut rss_refit = 0.0; let mut nnz = 0;
        for c in 0..p {
            let cc = corr.column(c).to_owned() / nf;
            let fit = lasso_solve_gram(&gram_n, &cc, rho, &opts, Array1::zeros(pq));
            let support: Vec<usize> = (0..pq).filter(|&a| fit.beta[a].abs() > 1e-10).collect();
            nnz += support.len();
            let quad = fit.beta.dot(&gram.dot(&fit.beta));
            let lin = fit.beta.dot(&corr.column(c));
            rss_lasso += sq[c] - 2.0*lin + quad;
            // naive dense OLS refit on support
            if !support.is_empty() {
                let k = support.len();
                let mut g = Array2::<f64>::zeros((k,k));
                let mut cv = Array1::<f64>::zeros(k);
                for (i,&a) in support.iter().enumerate() {
                    cv[i] = corr[(a,c)];
                    for (j,&b) in support.iter().enumerate() { g[(i,j)] = gram[(a,b)]; }
                }
                // gauss elim
                let mut gm = g.clone(); let mut bv = cv.clone();
                for i in 0..k {
                    let piv = gm[(i,i)];
                    for j in i+1..k {
                        let f = gm[(j,i)]/piv;
                        for l in i..k { gm[(j,l)] -= f*gm[(i,l)]; }
                        bv[j] -= f*bv[i];
                    }
                }
                let mut sol = Array1::<f64>::zeros(k);
                for i in (0..k).rev() {
                    let mut s = bv[i];
                    for l in i+1..k { s -= gm[(i,l)]*sol[l]; }
                    sol[i] = s/gm[(i,i)];
                }
                let mut rsite = sq[c];
                rsite -= sol.dot(&cv);
                rss_refit += rsite.max(0.0);
                for (i,&a) in support.iter().enumerate() { net_refit[(c,a)] = sol[i]; }
            } else { rss_refit += sq[c]; }
            for a in 0..pq { net[(c,a)] = fit.beta[a]; }
        }
        let rep = confusion_metrics(&net, truth_m, 1e-10).unwrap();
        let re_refit = relative_error(&net_refit, truth_m).unwrap();
        let n_sc = ((hi-lo)*p) as f64;
        let bic_plain = n_sc*(rss_lasso/n_sc).ln() + n_sc.ln()*nnz as f64;
        let bic_refit = n_sc*(rss_refit/n_sc).ln() + n_sc.ln()*nnz as f64;
        println!("{:.4} | {:3} | {:.2} {:.3} | {:.3} | {:.3} | {:.1} | {:.1}",
            mult, nnz, rep.sen, rep.spc, rep.re, re_refit, bic_plain, bic_refit);
    }
}

//! Synthetic piecewise (and nonlinear) VAR data generation: stationarity
//! rescaling, seeded simulation, and the catalog of benchmark scenarios.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PiecewiseVarModel, TimeSeriesMatrix};

/// Deterministic seed derivation (splitmix64 finalizer). Used wherever one
/// base seed has to fan out into independent streams.
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sparsity layout of the transition matrices in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityPattern {
    OneOffDiagonal,
    Diagonal,
    Random,
    BrainLike,
    NonlinearG,
}

/// Per-segment magnitude specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeSpec {
    /// One signed value per lag, per segment.
    PerLag(Vec<Vec<f64>>),
    /// Entries drawn uniformly from `[lo, hi]` with random signs, per
    /// segment, then rescaled to the stationarity target.
    UniformRange { lo: f64, hi: f64 },
    /// Per-segment (alpha, beta, gamma) triples of the nonlinear map.
    NonlinearTriples(Vec<(f64, f64, f64)>),
}

/// A benchmark scenario: dimensions, break layout and pattern description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub p: usize,
    pub t_len: usize,
    pub q: usize,
    /// Fractions t_j / T, strictly increasing in (0, 1).
    pub relative_breaks: Vec<f64>,
    pub sparsity_pattern: SparsityPattern,
    pub magnitudes: MagnitudeSpec,
    /// Isotropic noise variance sigma^2.
    pub noise_variance: f64,
    /// Default block size used by the reference experiments.
    pub b_t: usize,
    /// Default RNG seed for data generation (replicates override it).
    pub seed: u64,
}

impl ScenarioSpec {
    /// Break locations as absolute indices (first index of the new regime).
    pub fn absolute_breaks(&self) -> Vec<usize> {
        self.relative_breaks
            .iter()
            .map(|f| (f * self.t_len as f64).round() as usize)
            .collect()
    }
}

/// Ground-truth generating process of a scenario.
#[derive(Debug, Clone)]
pub enum ScenarioModel {
    Linear(PiecewiseVarModel),
    NonlinearG(NonlinearGParams),
}

impl ScenarioModel {
    pub fn as_linear(&self) -> Option<&PiecewiseVarModel> {
        match self {
            ScenarioModel::Linear(m) => Some(m),
            ScenarioModel::NonlinearG(_) => None,
        }
    }
}

/// Parameters of the nonlinear generator: per-segment (alpha, beta, gamma).
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearGParams {
    pub segments: Vec<(f64, f64, f64)>,
}

impl NonlinearGParams {
    pub fn new(segments: Vec<(f64, f64, f64)>) -> Result<Self> {
        if segments.len() != 2 {
            return Err(Error::invalid(
                "the nonlinear scenario has exactly two segments",
            ));
        }
        Ok(Self { segments })
    }
}

/// A generated series plus any warnings raised during simulation.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub series: TimeSeriesMatrix,
    pub warnings: Vec<String>,
}

/// Companion-form matrix of a p x pq transition matrix.
pub fn companion_matrix(transition: &Array2<f64>, q: usize) -> Array2<f64> {
    let p = transition.nrows();
    let pq = p * q;
    let mut c = Array2::zeros((pq, pq));
    for i in 0..p {
        for j in 0..pq {
            c[(i, j)] = transition[(i, j)];
        }
    }
    for l in 1..q {
        for i in 0..p {
            c[(l * p + i, (l - 1) * p + i)] = 1.0;
        }
    }
    c
}

/// Spectral radius by normalized repeated squaring (Gelfand's formula):
/// `rho = lim ||A^{2^m}||^(1/2^m)`, accumulating the normalizers in log
/// space. The Jordan-block polynomial factor vanishes at k = 2^60, so the
/// estimate is accurate to near machine precision; returns 0 for nilpotent
/// matrices.
pub fn spectral_radius(m: &Array2<f64>) -> f64 {
    let mut a = m.clone();
    let mut log_rho = 0.0_f64;
    let mut weight = 1.0_f64;
    for _ in 0..60 {
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        if !norm.is_finite() {
            return f64::INFINITY;
        }
        log_rho += weight * norm.ln();
        a.mapv_inplace(|v| v / norm);
        a = a.dot(&a);
        weight *= 0.5;
    }
    log_rho.exp()
}

/// Spectral radius of the companion form of one segment's transition matrix.
pub fn companion_spectral_radius(transition: &Array2<f64>, q: usize) -> f64 {
    spectral_radius(&companion_matrix(transition, q))
}

/// Rescales each segment's transition matrix by a common per-segment factor
/// so that its companion spectral radius equals `target` (within 1e-8).
/// The factor is found by bisection on the scale.
pub fn rescale_spectral_radius(
    transitions: &[Array2<f64>],
    q: usize,
    target: f64,
) -> Result<Vec<Array2<f64>>> {
    if !(0.0..1.0).contains(&target) || target == 0.0 {
        return Err(Error::invalid("target spectral radius must lie in (0, 1)"));
    }
    transitions
        .iter()
        .map(|m| {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("transition matrix has non-finite entries"));
            }
            let base = companion_spectral_radius(m, q);
            if base < 1e-12 {
                return Err(Error::Numerical(
                    "transition matrix has spectral radius 0 and cannot be rescaled".into(),
                ));
            }
            let radius_at = |s: f64| companion_spectral_radius(&(m * s), q);
            // bracket a crossing of rho(s * M) = target
            let mut hi = target / base;
            let mut guard = 0;
            while radius_at(hi) < target {
                hi *= 2.0;
                guard += 1;
                if guard > 80 {
                    return Err(Error::Numerical(
                        "could not bracket the stationarity rescaling factor".into(),
                    ));
                }
            }
            let mut lo = 0.0_f64;
            let mut mid = hi;
            for _ in 0..200 {
                mid = 0.5 * (lo + hi);
                let r = radius_at(mid);
                if (r - target).abs() <= 1e-9 {
                    break;
                }
                if r < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(m * mid)
        })
        .collect()
}

fn cholesky(m: &Array2<f64>) -> Option<Array2<f64>> {
    let n = m.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[(i, j)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Simulates the piecewise VAR recursion. The burn-in runs under the first
/// segment's dynamics and is discarded; at interior breaks the process
/// continues from its current state. Deterministic given the seed.
///
/// An all-zero `noise_cov` is taken to mean a noiseless simulation; any
/// other non-positive-definite covariance is an error. Unstable segments
/// (companion spectral radius >= 1) produce a warning, not an error.
pub fn simulate_piecewise_var(
    model: &PiecewiseVarModel,
    t_len: usize,
    burn_in: usize,
    seed: u64,
) -> Result<SimulationOutput> {
    let p = model.p();
    let q = model.q;
    if t_len <= q {
        return Err(Error::invalid("series length must exceed the lag order"));
    }
    if let Some(&last) = model.break_points.last() {
        if last >= t_len {
            return Err(Error::invalid(format!(
                "break point {last} outside the series length {t_len}"
            )));
        }
    }
    let mut warnings = Vec::new();
    for (j, m) in model.transitions.iter().enumerate() {
        let r = companion_spectral_radius(m, q);
        if r >= 1.0 - 1e-9 {
            warnings.push(format!(
                "segment {} has companion spectral radius {r:.4} >= 1; the simulated series may diverge",
                j + 1
            ));
        }
    }
    let zero_noise = model.noise_cov.iter().all(|v| *v == 0.0);
    let chol = if zero_noise {
        None
    } else {
        Some(
            cholesky(&model.noise_cov)
                .ok_or_else(|| Error::invalid("noise covariance is not positive definite"))?,
        )
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state: Vec<Array1<f64>> = (0..q).map(|_| Array1::zeros(p)).collect();
    let draw_noise = |rng: &mut ChaCha8Rng| -> Array1<f64> {
        match &chol {
            None => Array1::zeros(p),
            Some(l) => {
                let z = Array1::from_shape_fn(p, |_| rng.sample::<f64, _>(StandardNormal));
                l.dot(&z)
            }
        }
    };
    let step = |transition: &Array2<f64>, state: &[Array1<f64>], noise: &Array1<f64>| {
        let mut x = noise.clone();
        for lag in 0..q {
            let block = transition.slice(ndarray::s![.., lag * p..(lag + 1) * p]);
            x += &block.dot(&state[lag]);
        }
        x
    };
    for _ in 0..burn_in {
        let noise = draw_noise(&mut rng);
        let x = step(&model.transitions[0], &state, &noise);
        state.rotate_right(1);
        state[0] = x;
    }
    let mut data = Array2::zeros((t_len, p));
    for t in 0..t_len {
        let seg = model.segment_of(t);
        let noise = draw_noise(&mut rng);
        let x = step(&model.transitions[seg], &state, &noise);
        for j in 0..p {
            data[(t, j)] = x[j];
        }
        state.rotate_right(1);
        state[0] = x;
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "simulation diverged (non-finite values); check segment stationarity".into(),
        ));
    }
    Ok(SimulationOutput {
        series: TimeSeriesMatrix::new(data)?,
        warnings,
    })
}

/// One step of the nonlinear map: coordinate l feeds on coordinate l+1 of
/// the previous state, the last coordinate is pure noise.
pub fn nonlinear_g_step(params: (f64, f64, f64), prev: &Array1<f64>) -> Array1<f64> {
    let (alpha, beta, gamma) = params;
    let p = prev.len();
    Array1::from_shape_fn(p, |l| {
        if l + 1 < p {
            let v = prev[l + 1];
            (alpha + beta * (-gamma * v * v).exp()) * v
        } else {
            0.0
        }
    })
}

/// Simulates the two-segment nonlinear model `X_t = f_j(X_{t-1}) + eps_t`.
/// A short warm-up under the first segment's map is discarded so that the
/// sample starts in regime. Deterministic given the seed.
pub fn simulate_nonlinear_g(
    params: &NonlinearGParams,
    p: usize,
    t_len: usize,
    break_point: usize,
    noise_variance: f64,
    seed: u64,
) -> Result<TimeSeriesMatrix> {
    if p < 2 {
        return Err(Error::invalid("the nonlinear scenario needs p >= 2"));
    }
    if break_point == 0 || break_point >= t_len {
        return Err(Error::invalid("break point outside the series"));
    }
    if noise_variance < 0.0 {
        return Err(Error::invalid("noise variance must be nonnegative"));
    }
    let sd = noise_variance.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Array1<f64> {
        if sd == 0.0 {
            Array1::zeros(p)
        } else {
            Array1::from_shape_fn(p, |_| sd * rng.sample::<f64, _>(StandardNormal))
        }
    };
    let warmup = p + 40;
    let mut x = draw(&mut rng);
    for _ in 0..warmup {
        x = nonlinear_g_step(params.segments[0], &x) + draw(&mut rng);
    }
    let mut data = Array2::zeros((t_len, p));
    for t in 0..t_len {
        let seg = if t < break_point { 0 } else { 1 };
        x = nonlinear_g_step(params.segments[seg], &x) + draw(&mut rng);
        for j in 0..p {
            data[(t, j)] = x[j];
        }
    }
    TimeSeriesMatrix::new(data)
}

/// 1-off-diagonal pattern: entry (i, i+1) carries `magnitude` with sign
/// `(-1)^i`; segment j flips the global sign, so consecutive segments always
/// differ. Strictly upper-triangular, hence nilpotent and stationary for
/// any magnitude.
fn one_off_diagonal(p: usize, magnitude: f64, segment: usize) -> Array2<f64> {
    let seg_sign = if segment % 2 == 0 { 1.0 } else { -1.0 };
    let mut m = Array2::zeros((p, p));
    for i in 0..p - 1 {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        m[(i, i + 1)] = seg_sign * sign * magnitude;
    }
    m
}

/// 1-off diagonal with a single signed value (no alternation); used by the
/// lag-schedule scenarios where the value itself carries the sign.
fn plain_one_off(p: usize, value: f64) -> Array2<f64> {
    let mut m = Array2::zeros((p, p));
    for i in 0..p - 1 {
        m[(i, i + 1)] = value;
    }
    m
}

/// Stacks per-lag p x p matrices into the p x pq transition layout.
fn stack_lags(lags: &[Array2<f64>]) -> Array2<f64> {
    let p = lags[0].nrows();
    let q = lags.len();
    let mut m = Array2::zeros((p, p * q));
    for (l, lag) in lags.iter().enumerate() {
        for i in 0..p {
            for j in 0..p {
                m[(i, l * p + j)] = lag[(i, j)];
            }
        }
    }
    m
}

/// Random sparsity pattern: about `density` of all entries nonzero, values
/// uniform in +-[lo, hi]. Redraws (deterministically) if the pattern is
/// numerically nilpotent and cannot be rescaled.
fn random_pattern(p: usize, density: f64, lo: f64, hi: f64, seed: u64) -> Array2<f64> {
    for attempt in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, attempt));
        let mut m = Array2::zeros((p, p));
        let n_entries = ((p * p) as f64 * density).round().max(1.0) as usize;
        let mut placed = 0;
        while placed < n_entries {
            let i = rng.random_range(0..p);
            let j = rng.random_range(0..p);
            if m[(i, j)] != 0.0 {
                continue;
            }
            let mag = lo + rng.random::<f64>() * (hi - lo);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            m[(i, j)] = sign * mag;
            placed += 1;
        }
        if spectral_radius(&m) > 1e-9 {
            return m;
        }
    }
    unreachable!("random pattern with nonzero spectral radius not found");
}

/// Synthetic stand-in for an effective-connectivity-like sparsity pattern
/// (self effects plus a dense posterior cluster); shipped as a checked-in
/// 21 x 21 0/1 grid.
const BRAIN_PATTERN: &str = include_str!("../data/brain_pattern.csv");

fn brain_pattern() -> Array2<f64> {
    let rows: Vec<Vec<f64>> = BRAIN_PATTERN
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| v.trim().parse::<f64>().expect("bundled pattern is 0/1"))
                .collect()
        })
        .collect();
    let p = rows.len();
    Array2::from_shape_fn((p, p), |(i, j)| rows[i][j])
}

fn brain_like(magnitude: f64, segment: usize) -> Array2<f64> {
    let pattern = brain_pattern();
    let p = pattern.nrows();
    let seg_sign = if segment % 2 == 0 { 1.0 } else { -1.0 };
    Array2::from_shape_fn((p, p), |(i, j)| {
        if pattern[(i, j)] != 0.0 {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            seg_sign * sign * magnitude
        } else {
            0.0
        }
    })
}

const STATIONARITY_TARGET: f64 = 0.8;

/// Pattern seeds are fixed so every replicate of a scenario shares the same
/// ground-truth model; the user seed only drives the noise.
const PATTERN_SEED_E1: u64 = 0x5eed_e1;
const PATTERN_SEED_E2: u64 = 0x5eed_e2;

fn sign_mag(mag: f64, segment: usize) -> f64 {
    if segment % 2 == 0 {
        mag
    } else {
        -mag
    }
}

/// Returns the fully materialized scenario: dimensions, break layout, and
/// the generating model.
pub fn scenario_catalog(name: &str) -> Result<(ScenarioSpec, ScenarioModel)> {
    let one_off = |p: usize, n_seg: usize, mag: f64| -> Vec<Array2<f64>> {
        (0..n_seg).map(|j| one_off_diagonal(p, mag, j)).collect()
    };
    let spec = |name: &str,
                p: usize,
                t_len: usize,
                q: usize,
                breaks: &[usize],
                pattern: SparsityPattern,
                mags: MagnitudeSpec,
                noise: f64,
                b_t: usize| ScenarioSpec {
        name: name.to_string(),
        p,
        t_len,
        q,
        relative_breaks: breaks.iter().map(|&b| b as f64 / t_len as f64).collect(),
        sparsity_pattern: pattern,
        magnitudes: mags,
        noise_variance: noise,
        b_t,
        seed: 0,
    };
    let iso = |p: usize, var: f64| Array2::<f64>::eye(p) * var;

    let (s, model) = match name {
        "A.1" | "A.2" | "A.3" => {
            let b_t = match name {
                "A.1" => 60,
                "A.2" => 80,
                _ => 100,
            };
            let breaks = vec![1200, 2400, 3600, 4800];
            let mags = MagnitudeSpec::PerLag((0..5).map(|j| vec![sign_mag(0.8, j)]).collect());
            let s = spec(name, 20, 6000, 1, &breaks, SparsityPattern::OneOffDiagonal, mags, 0.1, b_t);
            let m = PiecewiseVarModel::new(1, breaks, one_off(20, 5, 0.8), iso(20, 0.1))?;
            (s, ScenarioModel::Linear(m))
        }
        "B.1" => {
            let breaks: Vec<usize> = (1..=6).map(|i| 3000 * i).collect();
            let mags = MagnitudeSpec::PerLag((0..7).map(|j| vec![sign_mag(0.8, j)]).collect());
            let s = spec(name, 20, 21000, 1, &breaks, SparsityPattern::OneOffDiagonal, mags, 0.1, 144);
            let m = PiecewiseVarModel::new(1, breaks, one_off(20, 7, 0.8), iso(20, 0.1))?;
            (s, ScenarioModel::Linear(m))
        }
        "C.1" | "C.2" | "C.3" | "C.4" => {
            let (p, breaks) = match name {
                "C.1" => (40, vec![500]),
                "C.2" => (60, vec![500]),
                "C.3" => (200, vec![500]),
                _ => (100, vec![333, 667]),
            };
            let n_seg = breaks.len() + 1;
            let mags = MagnitudeSpec::PerLag((0..n_seg).map(|j| vec![sign_mag(0.8, j)]).collect());
            let s = spec(name, p, 1000, 1, &breaks, SparsityPattern::OneOffDiagonal, mags, 0.1, 31);
            let m = PiecewiseVarModel::new(1, breaks, one_off(p, n_seg, 0.8), iso(p, 0.1))?;
            (s, ScenarioModel::Linear(m))
        }
        "D.1" | "D.2" => {
            // lag-1/lag-2 magnitude schedules on the 1-off-diagonal support
            let (t_len, breaks, schedule, b_t) = if name == "D.1" {
                (3000, vec![1000, 2000], vec![(0.6, 0.3), (-0.6, 0.3), (0.6, 0.3)], 55)
            } else {
                (2000, vec![1000], vec![(0.5, 0.35), (-0.6, -0.3)], 45)
            };
            let p = 20;
            let mags = MagnitudeSpec::PerLag(schedule.iter().map(|&(a, b)| vec![a, b]).collect());
            let transitions: Vec<Array2<f64>> = schedule
                .iter()
                .map(|&(m1, m2)| stack_lags(&[plain_one_off(p, m1), plain_one_off(p, m2)]))
                .collect();
            let s = spec(name, p, t_len, 2, &breaks, SparsityPattern::OneOffDiagonal, mags, 0.1, b_t);
            let m = PiecewiseVarModel::new(2, breaks, transitions, iso(p, 0.1))?;
            (s, ScenarioModel::Linear(m))
        }
        "E.1" | "E.2" => {
            let pattern_seed = if name == "E.1" { PATTERN_SEED_E1 } else { PATTERN_SEED_E2 };
            let p = 20;
            let breaks = vec![333, 667];
            let raw: Vec<Array2<f64>> = (0..3)
                .map(|j| random_pattern(p, 0.05, 0.5, 0.9, mix_seed(pattern_seed, j)))
                .collect();
            let transitions = rescale_spectral_radius(&raw, 1, STATIONARITY_TARGET)?;
            let mags = MagnitudeSpec::UniformRange { lo: 0.5, hi: 0.9 };
            let s = spec(name, p, 1000, 1, &breaks, SparsityPattern::Random, mags, 0.1, 31);
            let m = PiecewiseVarModel::new(1, breaks, transitions, iso(p, 0.1))?;
            (s, ScenarioModel::Linear(m))
        }
        "F.1" => {
            let breaks = vec![1200, 2400, 3600, 4800];
            let raw: Vec<Array2<f64>> = (0..5).map(|j| brain_like(0.8, j)).collect();
            let transitions = rescale_spectral_radius(&raw, 1, STATIONARITY_TARGET)?;
            let mags = MagnitudeSpec::PerLag((0..5).map(|j| vec![sign_mag(0.8, j)]).collect());
            let s = spec(name, 21, 6000, 1, &breaks, SparsityPattern::BrainLike, mags, 0.1, 80);
            let m = PiecewiseVarModel::new(1, breaks, transitions, iso(21, 0.1))?;
            (s, ScenarioModel::Linear(m))
        }
        "G.1" => {
            let triples = vec![(-1.0, -1.4, 1.0), (-1.0, -1.8, 0.01)];
            let mags = MagnitudeSpec::NonlinearTriples(triples.clone());
            let s = spec(name, 10, 400, 1, &[200], SparsityPattern::NonlinearG, mags, 0.01, 20);
            (s, ScenarioModel::NonlinearG(NonlinearGParams::new(triples)?))
        }
        "M" => {
            let p = 20;
            let t_len = 600;
            let mags = MagnitudeSpec::PerLag(vec![vec![0.8]]);
            let b_t = (t_len as f64).sqrt().floor() as usize;
            let s = spec(name, p, t_len, 1, &[], SparsityPattern::OneOffDiagonal, mags, 0.01, b_t);
            let m = PiecewiseVarModel::new(1, vec![], vec![one_off_diagonal(p, 0.8, 0)], iso(p, 0.01))?;
            (s, ScenarioModel::Linear(m))
        }
        // long-series setting of the runtime-versus-block-size study
        "RT.1" => {
            let p = 10;
            let t_len = 20_000;
            let breaks = vec![4000, 8000, 12_000, 16_000];
            let mags = MagnitudeSpec::PerLag((0..5).map(|j| vec![sign_mag(0.8, j)]).collect());
            let b_t = (t_len as f64).sqrt().floor() as usize;
            let s = spec(name, p, t_len, 1, &breaks, SparsityPattern::OneOffDiagonal, mags, 0.1, b_t);
            let m = PiecewiseVarModel::new(1, breaks, one_off(p, 5, 0.8), iso(p, 0.1))?;
            (s, ScenarioModel::Linear(m))
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok((s, model))
}

/// Default burn-in before the first segment.
pub const DEFAULT_BURN_IN: usize = 500;

/// Generates one replicate of a scenario with the given seed.
pub fn generate_scenario(
    name: &str,
    seed: u64,
) -> Result<(TimeSeriesMatrix, ScenarioSpec, ScenarioModel)> {
    let (mut spec, model) = scenario_catalog(name)?;
    spec.seed = seed;
    let series = match &model {
        ScenarioModel::Linear(m) => {
            simulate_piecewise_var(m, spec.t_len, DEFAULT_BURN_IN, seed)?.series
        }
        ScenarioModel::NonlinearG(params) => simulate_nonlinear_g(
            params,
            spec.p,
            spec.t_len,
            spec.absolute_breaks()[0],
            spec.noise_variance,
            seed,
        )?,
    };
    Ok((series, spec, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use ndarray::arr2;

    /// Eigenvalue oracle: companion radius via nalgebra's Schur-based
    /// complex eigenvalues, independent of the repeated-squaring path.
    fn eigen_radius(transition: &Array2<f64>, q: usize) -> f64 {
        let c = companion_matrix(transition, q);
        let n = c.nrows();
        let m = DMatrix::from_fn(n, n, |i, j| c[(i, j)]);
        m.complex_eigenvalues()
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn scalar_rescale_is_direct_ratio() {
        let m = arr2(&[[2.0]]);
        let out = rescale_spectral_radius(&[m], 1, 0.8).unwrap();
        assert!((out[0][(0, 0)] - 0.8).abs() < 1e-8);
    }

    #[test]
    fn diagonal_rescale_hits_target() {
        let m = Array2::<f64>::eye(3) * 0.5;
        let out = rescale_spectral_radius(&[m], 1, 0.8).unwrap();
        for i in 0..3 {
            assert!((out[0][(i, i)] - 0.8).abs() < 1e-8);
        }
    }

    #[test]
    fn lag2_rescale_matches_eigen_oracle() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(4);
        let p = 4;
        let m = Array2::from_shape_fn((p, 2 * p), |_| 0.3 * (rng.random::<f64>() - 0.5));
        let out = rescale_spectral_radius(&[m], 2, 0.8).unwrap();
        let r = eigen_radius(&out[0], 2);
        assert!((r - 0.8).abs() < 1e-8, "eigen oracle radius {r}");
    }

    #[test]
    fn rescale_rejects_nilpotent() {
        let m = plain_one_off(4, 0.8);
        assert!(rescale_spectral_radius(&[m], 1, 0.8).is_err());
    }

    #[test]
    fn rescale_is_idempotent_at_target() {
        let m = random_pattern(8, 0.2, 0.5, 0.9, 77);
        let once = rescale_spectral_radius(&[m], 1, 0.8).unwrap();
        let twice = rescale_spectral_radius(&once, 1, 0.8).unwrap();
        for (a, b) in once[0].iter().zip(twice[0].iter()) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
        }
    }

    #[test]
    fn zero_model_zero_noise_gives_zero_series() {
        let p = 2;
        let m = PiecewiseVarModel::new(
            1,
            vec![],
            vec![Array2::zeros((p, p))],
            Array2::zeros((p, p)),
        )
        .unwrap();
        let out = simulate_piecewise_var(&m, 50, 10, 3).unwrap();
        assert!(out.series.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn ar1_moments_match_theory() {
        // x_t = 0.5 x_{t-1} + eps, Var = sigma^2/(1-phi^2), lag-1
        // autocorrelation = phi.
        let p = 2;
        let phi = Array2::<f64>::eye(p) * 0.5;
        let m = PiecewiseVarModel::new(1, vec![], vec![phi], Array2::eye(p) * 0.1).unwrap();
        let out = simulate_piecewise_var(&m, 10_000, 500, 42).unwrap();
        let x = out.series.data();
        for j in 0..p {
            let col: Vec<f64> = x.column(j).to_vec();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var =
                col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / col.len() as f64;
            let mut acov = 0.0;
            for t in 1..col.len() {
                acov += (col[t] - mean) * (col[t - 1] - mean);
            }
            acov /= (col.len() - 1) as f64;
            let rho = acov / var;
            assert!((rho - 0.5).abs() < 0.05, "autocorrelation {rho}");
            let theory = 0.1 / (1.0 - 0.25);
            assert!((var - theory).abs() < 0.15 * theory, "variance {var} vs {theory}");
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let (s1, _, _) = generate_scenario("E.1", 9).unwrap();
        let (s2, _, _) = generate_scenario("E.1", 9).unwrap();
        assert_eq!(s1.data(), s2.data());
        let (s3, _, _) = generate_scenario("E.1", 10).unwrap();
        assert_ne!(s1.data(), s3.data());
    }

    #[test]
    fn segment_halves_have_similar_covariance() {
        // stationarity smoke test on a single long segment
        let (spec, model) = scenario_catalog("E.1").unwrap();
        let m = model.as_linear().unwrap();
        let single = PiecewiseVarModel::new(
            1,
            vec![],
            vec![m.transitions[0].clone()],
            m.noise_cov.clone(),
        )
        .unwrap();
        let out = simulate_piecewise_var(&single, 4000, 500, 5).unwrap();
        let x = out.series.data();
        let cov = |lo: usize, hi: usize| {
            let n = (hi - lo) as f64;
            let p = spec.p;
            let mut mu = vec![0.0; p];
            for t in lo..hi {
                for j in 0..p {
                    mu[j] += x[(t, j)] / n;
                }
            }
            let mut c = Array2::<f64>::zeros((p, p));
            for t in lo..hi {
                for a in 0..p {
                    for b in 0..p {
                        c[(a, b)] += (x[(t, a)] - mu[a]) * (x[(t, b)] - mu[b]) / n;
                    }
                }
            }
            c
        };
        let c1 = cov(0, 2000);
        let c2 = cov(2000, 4000);
        let diff = (&c1 - &c2).iter().map(|v| v * v).sum::<f64>().sqrt();
        let base = c1.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff / base < 0.2, "relative covariance drift {}", diff / base);
    }

    #[test]
    fn nonlinear_zero_params_zero_noise_collapse() {
        let params = NonlinearGParams::new(vec![(0.0, 0.0, 1.0), (0.0, 0.0, 1.0)]).unwrap();
        let ts = simulate_nonlinear_g(&params, 4, 20, 10, 0.0, 1).unwrap();
        assert!(ts.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn nonlinear_single_step_matches_formula() {
        let prev = Array1::from(vec![0.3, -0.7, 1.1, 0.0]);
        let (a, b, g) = (-1.0, -1.4, 1.0);
        let next = nonlinear_g_step((a, b, g), &prev);
        for l in 0..3 {
            let v = prev[l + 1];
            let expected = (a + b * (-g * v * v).exp()) * v;
            assert!((next[l] - expected).abs() < 1e-15);
        }
        assert_eq!(next[3], 0.0);
    }

    #[test]
    fn nonlinear_paper_setting_generates() {
        let (_, model) = scenario_catalog("G.1").unwrap();
        let ScenarioModel::NonlinearG(params) = &model else {
            panic!("G.1 must be nonlinear")
        };
        assert_eq!(params.segments[0], (-1.0, -1.4, 1.0));
        assert_eq!(params.segments[1], (-1.0, -1.8, 0.01));
        let ts = simulate_nonlinear_g(params, 10, 400, 200, 0.01, 7).unwrap();
        assert_eq!(ts.t_len(), 400);
        assert_eq!(ts.p(), 10);
    }

    #[test]
    fn catalog_a1_dimensions() {
        let (spec, model) = scenario_catalog("A.1").unwrap();
        assert_eq!((spec.p, spec.t_len, spec.b_t, spec.q), (20, 6000, 60, 1));
        assert_eq!(spec.absolute_breaks(), vec![1200, 2400, 3600, 4800]);
        let m = model.as_linear().unwrap();
        assert_eq!(m.n_segments(), 5);
        let (series, ..) = generate_scenario("A.1", 1).unwrap();
        assert_eq!((series.t_len(), series.p()), (6000, 20));
    }

    #[test]
    fn catalog_d2_magnitudes() {
        let (spec, model) = scenario_catalog("D.2").unwrap();
        let MagnitudeSpec::PerLag(mags) = &spec.magnitudes else {
            panic!("D.2 uses per-lag magnitudes")
        };
        assert_eq!(mags, &vec![vec![0.5, 0.35], vec![-0.6, -0.3]]);
        let m = model.as_linear().unwrap();
        assert_eq!(m.q, 2);
        assert_eq!(m.transitions[0][(0, 1)], 0.5);
        assert_eq!(m.transitions[0][(0, 20 + 1)], 0.35);
        assert_eq!(m.transitions[1][(0, 1)], -0.6);
        assert_eq!(m.transitions[1][(0, 20 + 1)], -0.3);
    }

    #[test]
    fn catalog_m_has_no_breaks() {
        let (spec, model) = scenario_catalog("M").unwrap();
        assert!(spec.relative_breaks.is_empty());
        let m = model.as_linear().unwrap();
        assert!(m.break_points.is_empty());
        assert_eq!(m.transitions[0][(0, 1)].abs(), 0.8);
    }

    #[test]
    fn catalog_rejects_unknown() {
        assert!(matches!(
            scenario_catalog("Z.9"),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn rescaled_scenarios_hit_stationarity_target() {
        for name in ["E.1", "F.1"] {
            let (_, model) = scenario_catalog(name).unwrap();
            let m = model.as_linear().unwrap();
            for tr in &m.transitions {
                let r = eigen_radius(tr, m.q);
                assert!((r - 0.8).abs() < 1e-7, "{name}: radius {r}");
            }
        }
    }

    #[test]
    fn gelfand_radius_matches_eigen_oracle() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(13);
        for _ in 0..10 {
            let n = 6;
            let m = Array2::from_shape_fn((n, n), |_| rng.random::<f64>() - 0.5);
            let gelfand = spectral_radius(&m);
            let nal = DMatrix::from_fn(n, n, |i, j| m[(i, j)])
                .complex_eigenvalues()
                .iter()
                .map(|e| e.norm())
                .fold(0.0, f64::max);
            assert!(
                (gelfand - nal).abs() < 1e-9 * nal.max(1.0),
                "{gelfand} vs {nal}"
            );
        }
    }
}

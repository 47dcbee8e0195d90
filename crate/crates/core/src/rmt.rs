//! Monte Carlo verifier: finite-dimensional models of the free factors and
//! the spectrum of `B_n^{1/2n}`.
//!
//! Each factor is `T = U·diag(√s₁, …, √s_N)` with `U` Haar-orthogonal and
//! `s_i` drawn iid from `μ`. The sample of `B_n^{1/2n}` is the set of
//! `σ_i(T_n⋯T₁)^{1/n}`, computed either from one product (`direct`) or by
//! accumulating the diagonals of successive QR factorizations (`qr_log`).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Measure;

/// Largest product length accepted by the direct method.
pub const MAX_DIRECT_FACTORS: usize = 32;

/// Rotations are real orthogonal; a complex unitary mode has the same limits.
pub const COMPLEX_ROTATIONS: bool = false;

/// Relative threshold, in units of `N·ε`, below which a singular value or an
/// `R` diagonal counts as an exact zero.
const RANK_THRESHOLD: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    QrLog,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::QrLog => "qr_log",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "qr_log" | "qr-log" | "qr" => Ok(Method::QrLog),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected direct or qr_log)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dim: usize,
    pub n_factors: usize,
    pub trials: usize,
    pub seed: u64,
    pub method: Method,
}

impl SimConfig {
    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("dim", self.dim),
            ("n_factors", self.n_factors),
            ("trials", self.trials),
        ] {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.method == Method::Direct && self.n_factors > MAX_DIRECT_FACTORS {
            return Err(Error::InvalidParameter(format!(
                "direct method supports at most {MAX_DIRECT_FACTORS} factors, got {} (use qr_log)",
                self.n_factors
            )));
        }
        Ok(())
    }
}

/// Sorted samples of the spectrum of `B_n^{1/2n}` pooled over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub values: Vec<f64>,
    pub config: Option<SimConfig>,
}

impl SpectrumSample {
    /// Sorts `values` ascending.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        SpectrumSample {
            values,
            config: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of samples equal to zero.
    pub fn zeros(&self) -> usize {
        self.values.iter().filter(|&&v| v == 0.0).count()
    }
}

/// One row of a goodness-of-fit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub x: f64,
    pub ecdf: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub ks_distance: f64,
    pub cdf_table: Vec<CdfRow>,
}

/// Child seed of trial `trial`, a splitmix64 mix of `(seed, trial)`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ trial.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Haar-distributed `N×N` orthogonal matrix: QR of a Gaussian matrix with the
/// columns of `Q` multiplied by the signs of `R`'s diagonal.
pub fn sample_haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// `count` iid draws from `μ` by inverse CDF.
pub fn sample_measure<R: Rng + ?Sized>(
    mu: &Measure<f64>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    (0..count)
        .map(|_| mu.quantile(rng.random::<f64>()))
        .collect()
}

/// `T = U·diag(√s)` with `U` Haar and `s_i` iid from `μ`.
///
/// The draws are sorted in decreasing order, which leaves the law of `T`
/// unchanged (`U` absorbs the permutation) and puts the null columns of a
/// rank-deficient factor last, where sequential QR also places them.
pub fn sample_factor<R: Rng + ?Sized>(
    mu: &Measure<f64>,
    n: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let mut s = sample_measure(mu, n, rng)?;
    s.sort_by(|a, b| b.total_cmp(a));
    let mut t = sample_haar_orthogonal(n, rng);
    for (mut col, &sj) in t.column_iter_mut().zip(&s) {
        col *= sj.max(0.0).sqrt();
    }
    Ok(t)
}

fn trial_rng(cfg: &SimConfig, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial as u64))
}

fn direct_trial(mu: &Measure<f64>, cfg: &SimConfig, trial: usize) -> Result<Vec<f64>> {
    let mut rng = trial_rng(cfg, trial);
    let n = cfg.dim;
    let mut p = DMatrix::<f64>::identity(n, n);
    let mut log_scale = 0.0;
    for k in 0..cfg.n_factors {
        let t = sample_factor(mu, n, &mut rng)?;
        p = t * p;
        let scale = p.amax();
        if !scale.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite entries in trial {trial} at factor {}",
                k + 1
            )));
        }
        if scale == 0.0 {
            return Ok(vec![0.0; n]);
        }
        p /= scale;
        log_scale += scale.ln();
    }
    let sv = p.singular_values();
    if sv.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite singular values in trial {trial}"
        )));
    }
    let floor = RANK_THRESHOLD * n as f64 * f64::EPSILON * sv.max();
    let inv_n = 1.0 / cfg.n_factors as f64;
    Ok(sv
        .iter()
        .map(|&s| {
            if s <= floor {
                0.0
            } else {
                ((s.ln() + log_scale) * inv_n).exp()
            }
        })
        .collect())
}

fn qr_log_trial(mu: &Measure<f64>, cfg: &SimConfig, trial: usize) -> Result<Vec<f64>> {
    let mut rng = trial_rng(cfg, trial);
    let n = cfg.dim;
    let mut q = DMatrix::<f64>::identity(n, n);
    let mut ell = vec![0.0f64; n];
    let mut zero = vec![false; n];
    for k in 0..cfg.n_factors {
        let a = sample_factor(mu, n, &mut rng)? * &q;
        let qr = a.qr();
        let r = qr.r();
        let rmax = r.amax();
        if !rmax.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite entries in trial {trial} at factor {}",
                k + 1
            )));
        }
        let floor = RANK_THRESHOLD * n as f64 * f64::EPSILON * rmax;
        for i in 0..n {
            let d = r[(i, i)].abs();
            if d <= floor {
                zero[i] = true;
            } else {
                ell[i] += d.ln();
            }
        }
        q = qr.q();
    }
    let inv_n = 1.0 / cfg.n_factors as f64;
    Ok(ell
        .iter()
        .zip(&zero)
        .map(|(&l, &z)| if z { 0.0 } else { (l * inv_n).exp() })
        .collect())
}

fn run(
    mu: &Measure<f64>,
    cfg: &SimConfig,
    trial: fn(&Measure<f64>, &SimConfig, usize) -> Result<Vec<f64>>,
) -> Result<SpectrumSample> {
    cfg.check()?;
    let blocks = (0..cfg.trials)
        .into_par_iter()
        .map(|i| trial(mu, cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let mut sample = SpectrumSample::from_values(blocks.concat());
    sample.config = Some(*cfg);
    Ok(sample)
}

/// Spectrum of `B_n^{1/2n}` from the rescaled product `T_n⋯T₁` and its SVD.
pub fn simulate_direct(mu: &Measure<f64>, cfg: &SimConfig) -> Result<SpectrumSample> {
    if cfg.method != Method::Direct {
        return Err(Error::InvalidParameter(
            "simulate_direct needs method = direct".into(),
        ));
    }
    run(mu, cfg, direct_trial)
}

/// Spectrum of `B_n^{1/2n}` by sequential QR: `T_k·Q_{k−1} = Q_k·R_k`, samples
/// `exp(Σ_k ln|R_k[i,i]| / n)`. Exactly rank-deficient directions give 0.
pub fn simulate_qr_log(mu: &Measure<f64>, cfg: &SimConfig) -> Result<SpectrumSample> {
    if cfg.method != Method::QrLog {
        return Err(Error::InvalidParameter(
            "simulate_qr_log needs method = qr_log".into(),
        ));
    }
    run(mu, cfg, qr_log_trial)
}

/// Dispatches on `cfg.method`.
pub fn simulate(mu: &Measure<f64>, cfg: &SimConfig) -> Result<SpectrumSample> {
    match cfg.method {
        Method::Direct => simulate_direct(mu, cfg),
        Method::QrLog => simulate_qr_log(mu, cfg),
    }
}

/// Kolmogorov–Smirnov comparison of a sample with a predicted law. Both CDFs
/// and their left limits are tabulated at every sample point and every
/// breakpoint of the prediction, which is where the supremum is attained.
pub fn ks_report(sample: &SpectrumSample, predicted: &Measure<f64>) -> Result<GofReport> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let xs = &sample.values;
    let n = xs.len() as f64;
    let mut points: Vec<f64> = xs.clone();
    points.extend(predicted.breakpoints());
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut table = Vec::with_capacity(2 * points.len());
    let mut ks = 0.0f64;
    for x in points {
        let below = xs.partition_point(|&v| v < x) as f64 / n;
        let upto = xs.partition_point(|&v| v <= x) as f64 / n;
        let rows = [
            CdfRow {
                x,
                ecdf: below,
                cdf: predicted.cdf_left(x),
            },
            CdfRow {
                x,
                ecdf: upto,
                cdf: predicted.cdf(x),
            },
        ];
        for row in rows {
            ks = ks.max((row.ecdf - row.cdf).abs());
        }
        if rows[0] != rows[1] {
            table.push(rows[0]);
        }
        table.push(rows[1]);
    }
    Ok(GofReport {
        ks_distance: ks.min(1.0),
        cdf_table: table,
    })
}

/// Two-sample Kolmogorov–Smirnov distance between sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Elementwise `ln` of the positive samples, with the number of zeros dropped.
pub fn lyapunov_empirical(sample: &SpectrumSample) -> (SpectrumSample, usize) {
    let logs: Vec<f64> = sample
        .values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|v| v.ln())
        .collect();
    let dropped = sample.len() - logs.len();
    let mut out = SpectrumSample::from_values(logs);
    out.config = sample.config;
    (out, dropped)
}

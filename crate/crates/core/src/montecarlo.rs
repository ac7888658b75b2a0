//! Simulation of `dX = μX dt + σX dW`, `dY = X dt`, kernel density estimates of
//! the terminal law and Feynman–Kac pricing.
//!
//! Every path draws from its own ChaCha stream keyed by `(seed, path index)`,
//! so results do not depend on how rayon schedules the work.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::CompensatedSum;

type CoefFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Euler/Milstein retries after a non-positive `X`, halving the step each time.
pub const MAX_HALVINGS: u32 = 3;

#[derive(Clone)]
pub struct SdeModel {
    pub descriptor: String,
    mu: CoefFn,
    sigma: CoefFn,
    pub sigma_min: f64,
}

impl fmt::Debug for SdeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeModel")
            .field("descriptor", &self.descriptor)
            .field("sigma_min", &self.sigma_min)
            .finish()
    }
}

impl SdeModel {
    pub fn new<M, S>(descriptor: impl Into<String>, mu: M, sigma: S) -> Self
    where
        M: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        SdeModel {
            descriptor: descriptor.into(),
            mu: Arc::new(mu),
            sigma: Arc::new(sigma),
            sigma_min: 1e-8,
        }
    }

    pub fn constant(mu: f64, sigma: f64) -> Self {
        Self::new(
            format!("gbm(mu={mu}, sigma={sigma})"),
            move |_, _, _| mu,
            move |_, _, _| sigma,
        )
    }

    /// Process of `L₀`: `μ = 1`, `σ = √2`, so `log X_t = √2 W_t`.
    pub fn l0() -> Self {
        let mut m = Self::constant(1.0, std::f64::consts::SQRT_2);
        m.descriptor = "l0".into();
        m
    }

    /// `X = e^{2W}`, `Y = ∫ e^{2W}`.
    pub fn yor() -> Self {
        let mut m = Self::constant(2.0, 2.0);
        m.descriptor = "yor".into();
        m
    }

    /// `σ²/2 = 1 + 0.25 sin y`, `μ = 1`.
    pub fn sine() -> Self {
        Self::new(
            "sine",
            |_, _, _| 1.0,
            |_, y, _| (2.0 * (1.0 + 0.25 * y.sin())).sqrt(),
        )
    }

    /// Same volatility, drift replaced by `r`.
    pub fn risk_neutral(&self, r: f64) -> Self {
        SdeModel {
            descriptor: format!("{} [mu=r={r}]", self.descriptor),
            mu: Arc::new(move |_, _, _| r),
            sigma: self.sigma.clone(),
            sigma_min: self.sigma_min,
        }
    }

    pub fn with_sigma_min(mut self, sigma_min: f64) -> Self {
        self.sigma_min = sigma_min;
        self
    }

    pub fn mu(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.mu)(x, y, t)
    }

    pub fn sigma(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.sigma)(x, y, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Log-Euler step, exact when the coefficients are constant.
    ExactLognormal,
    Euler,
    Milstein,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_lognormal" => Ok(Scheme::ExactLognormal),
            "euler" => Ok(Scheme::Euler),
            "milstein" => Ok(Scheme::Milstein),
            _ => Err(Error::Config(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 100_000,
            n_steps: 100,
            horizon: 1.0,
            seed: 0,
            scheme: Scheme::ExactLognormal,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::Config(
                "n_paths and n_steps must be at least 1".into(),
            ));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if (self.n_paths as u64) >= 1 << 56 {
            return Err(Error::Config(
                "n_paths exceeds the stream index range".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Samples {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `(X, Y)` at each of the `n_steps + 1` grid times, when requested.
    pub paths: Option<Vec<Vec<[f64; 2]>>>,
    /// Paths that needed at least one step halving.
    pub resimulated: usize,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn path_rng(seed: u64, path: usize, attempt: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64 | (u64::from(attempt) << 56));
    rng
}

struct PathOut {
    x: f64,
    y: f64,
    trace: Option<Vec<[f64; 2]>>,
    retried: bool,
}

fn simulate_one<F: Fn(f64) -> f64>(
    model: &SdeModel,
    x0: f64,
    y0: f64,
    cfg: &McConfig,
    path: usize,
    keep: bool,
    integrand: &F,
) -> Result<PathOut> {
    let halvings = match cfg.scheme {
        Scheme::ExactLognormal => 0,
        _ => MAX_HALVINGS,
    };
    'attempt: for attempt in 0..=halvings {
        let refine = 1usize << attempt;
        let steps = cfg.n_steps * refine;
        let dt = cfg.horizon / steps as f64;
        let sq = dt.sqrt();
        let mut rng = path_rng(cfg.seed, path, attempt);
        let (mut x, mut y) = (x0, y0);
        let mut trace = keep.then(|| {
            let mut v = Vec::with_capacity(cfg.n_steps + 1);
            v.push([x, y]);
            v
        });
        for k in 0..steps {
            let t = k as f64 * dt;
            let s = model.sigma(x, y, t);
            if !(s >= model.sigma_min) {
                return Err(Error::Simulation(format!(
                    "sigma = {s} below sigma_min = {} at ({x}, {y}, {t})",
                    model.sigma_min
                )));
            }
            let m = model.mu(x, y, t);
            let dw = sq * rng.sample::<f64, _>(StandardNormal);
            let xn = match cfg.scheme {
                Scheme::ExactLognormal => x * ((m - 0.5 * s * s) * dt + s * dw).exp(),
                Scheme::Euler => x + m * x * dt + s * x * dw,
                Scheme::Milstein => {
                    let hx = 1e-6 * x.max(1.0);
                    let ds = (model.sigma(x + hx, y, t) - model.sigma(x - hx, y, t)) / (2.0 * hx);
                    let b = s * x;
                    let db = s + x * ds;
                    x + m * x * dt + b * dw + 0.5 * b * db * (dw * dw - dt)
                }
            };
            if !(xn > 0.0) || !xn.is_finite() {
                if attempt < halvings {
                    continue 'attempt;
                }
                return Err(Error::Simulation(format!(
                    "path {path}: X left (0, inf) after {halvings} step halvings"
                )));
            }
            y += 0.5 * (integrand(x) + integrand(xn)) * dt;
            x = xn;
            if let Some(tr) = trace.as_mut() {
                if (k + 1) % refine == 0 {
                    tr.push([x, y]);
                }
            }
        }
        return Ok(PathOut {
            x,
            y,
            trace,
            retried: attempt > 0,
        });
    }
    unreachable!("the last attempt either returns or errors")
}

/// Terminal `(X_T, Y_T)` of `cfg.n_paths` independent paths from `(x0, y0)`.
pub fn simulate_paths(
    model: &SdeModel,
    x0: f64,
    y0: f64,
    cfg: &McConfig,
    keep_paths: bool,
) -> Result<Samples> {
    simulate_functional(model, x0, y0, cfg, keep_paths, |x| x)
}

/// As [`simulate_paths`] with `dY = f(X) dt`.
pub fn simulate_functional<F>(
    model: &SdeModel,
    x0: f64,
    y0: f64,
    cfg: &McConfig,
    keep_paths: bool,
    integrand: F,
) -> Result<Samples>
where
    F: Fn(f64) -> f64 + Sync,
{
    cfg.validate()?;
    if !(x0 > 0.0) || !x0.is_finite() || !y0.is_finite() {
        return Err(Error::InvalidPoint(format!(
            "start ({x0}, {y0}) needs x0 > 0"
        )));
    }
    let outs: Vec<PathOut> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| simulate_one(model, x0, y0, cfg, p, keep_paths, &integrand))
        .collect::<Result<_>>()?;
    let mut s = Samples {
        x: Vec::with_capacity(outs.len()),
        y: Vec::with_capacity(outs.len()),
        paths: keep_paths.then(|| Vec::with_capacity(outs.len())),
        resimulated: 0,
    };
    for o in outs {
        s.x.push(o.x);
        s.y.push(o.y);
        s.resimulated += usize::from(o.retried);
        if let (Some(ps), Some(tr)) = (s.paths.as_mut(), o.trace) {
            ps.push(tr);
        }
    }
    Ok(s)
}

/// Sample mean and its standard error.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().copied().collect::<CompensatedSum>().value() / n;
    if v.len() == 1 {
        return (mean, 0.0);
    }
    let ss = v
        .iter()
        .map(|a| (a - mean) * (a - mean))
        .collect::<CompensatedSum>()
        .value();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

/// Coordinates in which the kernel smoothing happens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KdeTransform {
    Identity,
    /// Smooth `(log x, log(y − y_origin))`; densities are mapped back with the Jacobian.
    Log {
        y_origin: f64,
    },
}

impl KdeTransform {
    fn forward(&self, x: f64, y: f64) -> Option<(f64, f64, f64)> {
        match *self {
            KdeTransform::Identity => Some((x, y, 1.0)),
            KdeTransform::Log { y_origin } => {
                let dy = y - y_origin;
                (x > 0.0 && dy > 0.0).then(|| (x.ln(), dy.ln(), 1.0 / (x * dy)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl GridSpec {
    pub fn uniform(x: (f64, f64, usize), y: (f64, f64, usize)) -> Self {
        let axis = |(a, b, n): (f64, f64, usize)| -> Vec<f64> {
            if n <= 1 {
                return vec![0.5 * (a + b)];
            }
            (0..n)
                .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                .collect()
        };
        GridSpec {
            xs: axis(x),
            ys: axis(y),
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in x-major order, matching [`DensitySurface::values`].
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs
            .iter()
            .flat_map(move |&x| self.ys.iter().map(move |&y| (x, y)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySurface {
    pub grid: GridSpec,
    /// x-major, `values[i * ys.len() + j]` at `(xs[i], ys[j])`.
    pub values: Vec<f64>,
    /// Estimated relative standard error of each value (`inf` where the estimate is 0).
    pub rel_se: Vec<f64>,
    pub bandwidth: (f64, f64),
    pub transform: KdeTransform,
    pub n_samples: usize,
}

fn robust_scale(v: &mut [f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
    let iqr = (q(0.75) - q(0.25)) / 1.349;
    if iqr > 0.0 {
        sd.min(iqr)
    } else {
        sd
    }
}

/// Silverman's rule for a two-dimensional product Gaussian kernel.
pub fn silverman_bandwidth(u: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    if u.len() < 2 || u.len() != v.len() {
        return Err(Error::DegenerateSamples(
            "need at least two aligned samples".into(),
        ));
    }
    let f = (u.len() as f64).powf(-1.0 / 6.0);
    let (su, sv) = (robust_scale(&mut u.to_vec()), robust_scale(&mut v.to_vec()));
    if !(su > 0.0 && sv > 0.0) {
        return Err(Error::DegenerateSamples(format!(
            "zero spread in a coordinate ({su}, {sv})"
        )));
    }
    Ok((su * f, sv * f))
}

/// Minimum sample count accepted by [`density_estimate`].
pub const MIN_KDE_SAMPLES: usize = 10_000;

/// Product-Gaussian KDE of the joint law of `(x, y)` evaluated on `grid`.
pub fn density_estimate(
    xs: &[f64],
    ys: &[f64],
    grid: &GridSpec,
    transform: KdeTransform,
    bandwidth: Option<(f64, f64)>,
) -> Result<DensitySurface> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < MIN_KDE_SAMPLES {
        return Err(Error::DegenerateSamples(format!(
            "{} samples, need {MIN_KDE_SAMPLES}",
            xs.len()
        )));
    }
    let mut pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter_map(|(&x, &y)| transform.forward(x, y).map(|(u, v, _)| (u, v)))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateSamples(
            "no samples inside the transform's domain".into(),
        ));
    }
    let (hu, hv) = match bandwidth {
        Some(b) => b,
        None => {
            let (u, v): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            silverman_bandwidth(&u, &v)?
        }
    };
    if !(hu > 0.0 && hv > 0.0) {
        return Err(Error::Config(format!(
            "bandwidth must be positive, got ({hu}, {hv})"
        )));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // samples outside the transform's domain still count in the normalization
    let n = xs.len() as f64;
    let norm = 1.0 / (n * 2.0 * std::f64::consts::PI * hu * hv);
    let reach = 8.0;
    let (values, rel_se): (Vec<f64>, Vec<f64>) = grid
        .nodes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(x, y)| {
            let Some((u, v, jac)) = transform.forward(x, y) else {
                return (0.0, f64::INFINITY);
            };
            let lo = pts.partition_point(|p| p.0 < u - reach * hu);
            let hi = pts.partition_point(|p| p.0 <= u + reach * hu);
            let mut acc = CompensatedSum::default();
            for &(pu, pv) in &pts[lo..hi] {
                let dv = (pv - v) / hv;
                if dv.abs() > reach {
                    continue;
                }
                let du = (pu - u) / hu;
                acc.add((-0.5 * (du * du + dv * dv)).exp());
            }
            let f = acc.value() * norm;
            // Var f̂ ≈ f R(K) / (n hu hv), R(K) = 1/(4π)
            let rse = if f > 0.0 {
                (1.0 / (4.0 * std::f64::consts::PI * n * hu * hv * f)).sqrt()
            } else {
                f64::INFINITY
            };
            (f * jac, rse)
        })
        .unzip();
    Ok(DensitySurface {
        grid: grid.clone(),
        values,
        rel_se,
        bandwidth: (hu, hv),
        transform,
        n_samples: xs.len(),
    })
}

/// Gaussian KDE of a single coordinate, optionally smoothed in `log`.
pub fn marginal_density(
    samples: &[f64],
    at: &[f64],
    log: bool,
    bandwidth: Option<f64>,
) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSamples("need at least two samples".into()));
    }
    let mut u: Vec<f64> = if log {
        samples
            .iter()
            .filter(|&&s| s > 0.0)
            .map(|s| s.ln())
            .collect()
    } else {
        samples.to_vec()
    };
    let h = match bandwidth {
        Some(h) => h,
        None => {
            let s = robust_scale(&mut u.clone());
            if !(s > 0.0) {
                return Err(Error::DegenerateSamples("zero spread".into()));
            }
            0.9 * s * (u.len() as f64).powf(-0.2)
        }
    };
    u.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    Ok(at
        .par_iter()
        .map(|&a| {
            let (c, jac) = if log {
                if a <= 0.0 {
                    return 0.0;
                }
                (a.ln(), 1.0 / a)
            } else {
                (a, 1.0)
            };
            let lo = u.partition_point(|&p| p < c - 8.0 * h);
            let hi = u.partition_point(|&p| p <= c + 8.0 * h);
            let s: CompensatedSum = u[lo..hi]
                .iter()
                .map(|&p| (-0.5 * ((p - c) / h).powi(2)).exp())
                .collect();
            s.value() * norm * jac
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityComparison {
    /// `(estimate − reference)/reference` per node; `NaN` where the reference is 0.
    pub rel_errors: Vec<f64>,
    pub scored: Vec<bool>,
    pub n_scored: usize,
    pub median_abs_rel_error: f64,
    pub q90_abs_rel_error: f64,
    pub max_abs_rel_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    /// Nodes whose KDE relative standard error exceeds this are reported, not scored.
    pub max_rel_uncertainty: f64,
    /// Nodes where the reference falls below this fraction of its maximum are not scored.
    pub min_density_fraction: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            max_rel_uncertainty: 0.2,
            min_density_fraction: 0.1,
        }
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = (sorted.len() - 1) as f64 * p;
    let (i, f) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

/// Score a surface against reference values on the same grid nodes.
pub fn compare_density(
    surface: &DensitySurface,
    reference: &[f64],
    cfg: &CompareConfig,
) -> Result<DensityComparison> {
    if reference.len() != surface.values.len() {
        return Err(Error::LengthMismatch {
            expected: surface.values.len(),
            got: reference.len(),
        });
    }
    let peak = reference.iter().copied().fold(0.0f64, f64::max);
    let mut rel_errors = Vec::with_capacity(reference.len());
    let mut scored = Vec::with_capacity(reference.len());
    let mut abs = Vec::new();
    for ((&est, &r), &u) in surface.values.iter().zip(reference).zip(&surface.rel_se) {
        let e = if r > 0.0 {
            (est - r) / r
        } else if est == 0.0 {
            0.0
        } else {
            f64::NAN
        };
        let s = r > 0.0 && r >= cfg.min_density_fraction * peak && u < cfg.max_rel_uncertainty;
        if s {
            abs.push(e.abs());
        }
        rel_errors.push(e);
        scored.push(s);
    }
    abs.sort_by(f64::total_cmp);
    Ok(DensityComparison {
        n_scored: abs.len(),
        median_abs_rel_error: quantile(&abs, 0.5),
        q90_abs_rel_error: quantile(&abs, 0.9),
        max_abs_rel_error: abs.last().copied().unwrap_or(f64::NAN),
        rel_errors,
        scored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPrice {
    pub price: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

/// `e^{−rT} E[φ(S_T, A_T)]` with `A_T = ∫₀ᵀ S dt` under the risk-neutral drift.
pub fn feynman_kac_price<F>(
    payoff: F,
    model: &SdeModel,
    r: f64,
    s0: f64,
    cfg: &McConfig,
) -> Result<McPrice>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let rn = model.risk_neutral(r);
    let s = simulate_paths(&rn, s0, 0.0, cfg, false)?;
    let values: Vec<f64> =
        s.x.iter()
            .zip(&s.y)
            .map(|(&st, &at)| payoff(st, at))
            .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "payoff at path {i} is {}",
            values[i]
        )));
    }
    let (m, se) = mean_and_se(&values);
    let d = (-r * cfg.horizon).exp();
    Ok(McPrice {
        price: d * m,
        std_error: d * se,
        n_paths: values.len(),
    })
}

//! Asian options priced by integrating the payoff against the fundamental
//! solutions of the reduced operators, with closed-form and Monte Carlo
//! references.
//!
//! Arithmetic average: with `m = r/σ² − ½`, `τ = σ²T/2` and `X` the `L₀`
//! process from `S₀`,
//!
//! ```text
//! price = e^{−rT} S₀^{−m} e^{−m²τ} ∫∫ Γ₀((S₀, σ²A₀/2, τ); (ξ, η, 0)) ξ^m φ(ξ, A₀ + 2(η − σ²A₀/2)/σ²) dξ dη
//! ```
//!
//! Geometric average: `log S` is Gaussian and `∫ log S` is its running
//! integral, so the Kolmogorov kernel of `∂ₓₓ + x∂_y − ∂_t` plays the role of `Γ₀`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::kernels::{kolmo_kernel, yor_density, KernelFlags, QuadratureConfig, YOR_T_MIN};
use crate::montecarlo::{
    feynman_kac_price, mean_and_se, simulate_functional, McConfig, McPrice, SdeModel,
};
use crate::quadrature::{gl_panels, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    FixedStrike,
    FloatingStrike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Right {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Average {
    Arithmetic,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsianOption {
    pub style: Style,
    pub right: Right,
    pub average: Average,
    /// Ignored for floating strikes.
    #[serde(default)]
    pub strike: f64,
    pub maturity: f64,
}

impl AsianOption {
    pub fn validate(&self) -> Result<()> {
        if !(self.strike >= 0.0) || !self.strike.is_finite() {
            return Err(Error::Config(format!(
                "strike must be >= 0, got {}",
                self.strike
            )));
        }
        if !(self.maturity > 0.0) || !self.maturity.is_finite() {
            return Err(Error::Config(format!(
                "maturity must be > 0, got {}",
                self.maturity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Market {
    #[serde(rename = "S0")]
    pub s0: f64,
    /// Integral `∫ S dt` accumulated before valuation (the state `y`); 0 at inception.
    #[serde(rename = "A0", default)]
    pub a0: f64,
    pub r: f64,
    pub sigma: f64,
}

impl Market {
    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0)
            || !(self.sigma > 0.0)
            || !self.s0.is_finite()
            || !self.sigma.is_finite()
        {
            return Err(Error::Config(format!(
                "S0 and sigma must be positive, got {} and {}",
                self.s0, self.sigma
            )));
        }
        if !(self.a0 >= 0.0) || !self.a0.is_finite() || !self.r.is_finite() {
            return Err(Error::Config(format!(
                "need A0 >= 0 and finite r, got {} and {}",
                self.a0, self.r
            )));
        }
        Ok(())
    }

    /// `m = r/σ² − ½`.
    pub fn m(&self) -> f64 {
        self.r / (self.sigma * self.sigma) - 0.5
    }
}

/// Option and market as one JSON document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingInput {
    pub option: AsianOption,
    pub market: Market,
}

/// Payoff at maturity; `average` is the time average, already divided by `T`.
pub fn payoff(option: &AsianOption, s_t: f64, average: f64) -> f64 {
    let v = match (option.style, option.right) {
        (Style::FixedStrike, Right::Call) => average - option.strike,
        (Style::FixedStrike, Right::Put) => option.strike - average,
        (Style::FloatingStrike, Right::Call) => s_t - average,
        (Style::FloatingStrike, Right::Put) => average - s_t,
    };
    v.max(0.0)
}

/// A point of the `L₀` problem and the factor mapping its solution back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L0Point {
    pub x: f64,
    pub y: f64,
    /// `L₀` time to maturity, `σ²(T − t)/2`.
    pub tau: f64,
    /// `x^{−m} e^{−m²τ}`: `u(S, y, t) = e^{−r(T−t)} weight · v(x, y_L₀, τ)` when
    /// `v` solves `L₀ v = 0` with data `ξ^m φ(ξ, 2η/σ²)`.
    pub weight: f64,
}

pub fn reduce_to_l0(s: f64, y: f64, t: f64, market: &Market, maturity: f64) -> Result<L0Point> {
    market.validate()?;
    if !(s > 0.0) || !(t <= maturity) {
        return Err(Error::Domain(format!(
            "need S > 0 and t <= T, got S={s}, t={t}, T={maturity}"
        )));
    }
    let h = 0.5 * market.sigma * market.sigma;
    let tau = h * (maturity - t);
    let m = market.m();
    Ok(L0Point {
        x: s,
        y: h * y,
        tau,
        weight: s.powf(-m) * (-m * m * tau).exp(),
    })
}

/// Inverse of [`reduce_to_l0`]: `(S, y, t)`.
pub fn from_l0(p: &L0Point, market: &Market, maturity: f64) -> (f64, f64, f64) {
    let h = 0.5 * market.sigma * market.sigma;
    (p.x, p.y / h, maturity - p.tau / h)
}

/// `e^{−rT}(S₀/T)(e^{rT}−1)/r`, the value of the `K = 0` fixed-strike call at inception.
pub fn k0_call_value(market: &Market, maturity: f64) -> f64 {
    let rt = market.r * maturity;
    let growth = if rt.abs() < 1e-8 {
        1.0 + 0.5 * rt
    } else {
        rt.exp_m1() / rt
    };
    (-rt).exp() * (market.a0 / maturity + market.s0 * growth)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingQuadConfig {
    /// Drop the region where the integrand envelope is below this fraction of its peak.
    pub tail_cutoff: f64,
    pub order: usize,
    /// Panels per axis piece on the coarse pass; the refinement pass doubles them.
    pub panels: usize,
    /// Nodes per axis of the scan locating the integration box.
    pub scan: usize,
    pub kernel: QuadratureConfig,
}

impl Default for PricingQuadConfig {
    fn default() -> Self {
        PricingQuadConfig {
            tail_cutoff: 1e-6,
            order: 16,
            panels: 4,
            scan: 120,
            kernel: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadPrice {
    pub price: f64,
    pub est_error: f64,
    pub refinement_diff: f64,
    pub kernel_error: f64,
    pub truncation_error: f64,
    pub flags: KernelFlags,
}

fn no_flags() -> KernelFlags {
    KernelFlags {
        exact: true,
        ..Default::default()
    }
}

struct Pass {
    value: f64,
    kernel_error: f64,
    flags: KernelFlags,
}

/// `∫∫ f(w, u)` over the tensor rule `ws × us` (outer `w`).
fn tensor_pass<F>(us: &(Vec<f64>, Vec<f64>), ws: &(Vec<f64>, Vec<f64>), f: &F) -> Result<Pass>
where
    F: Fn(f64, f64) -> Result<(f64, f64, KernelFlags)> + Sync,
{
    let rows: Vec<(f64, f64, KernelFlags)> =
        ws.0.par_iter()
            .zip(&ws.1)
            .map(|(&w, &ww)| -> Result<(f64, f64, KernelFlags)> {
                let mut acc = CompensatedSum::new();
                let mut err = 0.0;
                let mut flags = no_flags();
                for (&u, &uw) in us.0.iter().zip(&us.1) {
                    let (v, e, fl) = f(w, u)?;
                    acc.add(uw * v);
                    err += uw * e;
                    flags = flags.union(fl);
                }
                Ok((ww * acc.value(), ww * err, flags))
            })
            .collect::<Result<_>>()?;
    let mut value = CompensatedSum::new();
    let mut kernel_error = 0.0;
    let mut flags = no_flags();
    for (v, e, fl) in rows {
        value.add(v);
        kernel_error += e;
        flags = flags.union(fl);
    }
    Ok(Pass {
        value: value.value(),
        kernel_error,
        flags,
    })
}

fn pieces(
    lo: f64,
    hi: f64,
    kink: Option<f64>,
    panels: usize,
    order: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut breaks = vec![lo];
    if let Some(k) = kink.filter(|k| *k > lo && *k < hi) {
        breaks.push(k);
    }
    breaks.push(hi);
    for w in breaks.windows(2) {
        let (n, wt) = gl_panels(w[0], w[1], panels, order);
        nodes.extend(n);
        weights.extend(wt);
    }
    (nodes, weights)
}

/// Arithmetic-average price at inception by quadrature against `Γ₀`.
///
/// The integral runs over `(w, u)` with `ξ = S₀e^{2w}`, `η = σ²A₀/2 + 2S₀e^{u+cw}`,
/// `c = 2` for floating strikes so that the payoff kink is a coordinate line.
pub fn price_arithmetic_quadrature(
    option: &AsianOption,
    market: &Market,
    cfg: &PricingQuadConfig,
) -> Result<QuadPrice> {
    option.validate()?;
    market.validate()?;
    cfg.kernel.validate()?;
    if option.average != Average::Arithmetic {
        return Err(Error::Config(
            "price_arithmetic_quadrature needs an arithmetic average".into(),
        ));
    }
    if cfg.order < 2 || cfg.panels == 0 || cfg.scan < 8 || !(cfg.tail_cutoff > 0.0) {
        return Err(Error::Config(format!(
            "invalid pricing quadrature config {cfg:?}"
        )));
    }
    let big_t = option.maturity;
    let p = reduce_to_l0(market.s0, market.a0, 0.0, market, big_t)?;
    let (s0, a0, sig2) = (market.s0, market.a0, market.sigma * market.sigma);
    let m = market.m();
    // Γ₀ dξ dη = p(w, a, τ/2) dw da with ξ = x e^{2w}, η = y + 2xa
    let tp = 0.5 * p.tau;
    let c = match option.style {
        Style::FixedStrike => 0.0,
        Style::FloatingStrike => 2.0,
    };
    let kink = match option.style {
        Style::FixedStrike if option.strike * big_t > a0 => {
            Some(((option.strike * big_t - a0) * sig2 / (4.0 * s0)).ln())
        }
        Style::FixedStrike => None,
        Style::FloatingStrike if a0 == 0.0 => Some((sig2 * big_t / 4.0).ln()),
        Style::FloatingStrike => None,
    };
    let kcfg = cfg.kernel;
    let point = |w: f64, u: f64| -> Result<(f64, f64, KernelFlags)> {
        let a = (u + c * w).exp();
        if !(a > 0.0) || !a.is_finite() {
            return Ok((0.0, 0.0, no_flags()));
        }
        let k = yor_density(w, a, tp, &kcfg)?;
        if k.value == 0.0 && k.est_error == 0.0 {
            return Ok((0.0, 0.0, k.flags));
        }
        let s_t = s0 * (2.0 * w).exp();
        let avg = (a0 + 4.0 * s0 * a / sig2) / big_t;
        let g = a * (2.0 * m * w).exp() * payoff(option, s_t, avg);
        Ok((k.value * g, k.est_error * g, k.flags))
    };
    let envelope = |w: f64, u: f64| -> Result<f64> {
        let a = (u + c * w).exp();
        if !(a > 0.0) || !a.is_finite() {
            return Ok(0.0);
        }
        let k = yor_density(w, a, tp, &kcfg)?;
        Ok(k.value * a * (2.0 * m * w).exp() * (1.0 + (2.0 * w).exp() + a))
    };

    // locate the box
    let half = 9.0 * tp.sqrt() + 2.0 * (m.abs() + 1.0) * tp + 0.5;
    let span = 2.0 * (1.0 + c) * half;
    let (w_lo, w_hi) = (-half, half);
    let (u_lo, u_hi) = (tp.ln() - span - 6.0, tp.ln() + span + 3.0);
    let n = cfg.scan;
    let dw = (w_hi - w_lo) / n as f64;
    let du = (u_hi - u_lo) / n as f64;
    let cells: Vec<(usize, usize, f64, f64)> = (0..n * n)
        .into_par_iter()
        .map(|k| -> Result<(usize, usize, f64, f64)> {
            let (i, j) = (k / n, k % n);
            let (w, u) = (w_lo + (i as f64 + 0.5) * dw, u_lo + (j as f64 + 0.5) * du);
            Ok((i, j, envelope(w, u)?, point(w, u)?.0.abs()))
        })
        .collect::<Result<_>>()?;
    let peak = cells.iter().map(|c| c.2).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Quadrature(
            "integrand vanishes on the scan grid".into(),
        ));
    }
    let (mut i0, mut i1, mut j0, mut j1) = (n, 0, n, 0);
    for &(i, j, e, _) in &cells {
        if e >= cfg.tail_cutoff * peak {
            i0 = i0.min(i);
            i1 = i1.max(i);
            j0 = j0.min(j);
            j1 = j1.max(j);
        }
    }
    let (i0, i1) = (i0.saturating_sub(1), (i1 + 1).min(n - 1));
    let (j0, j1) = (j0.saturating_sub(1), (j1 + 1).min(n - 1));
    let truncation: f64 = cells
        .iter()
        .filter(|&&(i, j, _, _)| i < i0 || i > i1 || j < j0 || j > j1)
        .map(|c| c.3)
        .sum::<f64>()
        * dw
        * du;
    let (bw_lo, bw_hi) = (w_lo + i0 as f64 * dw, w_lo + (i1 + 1) as f64 * dw);
    let (bu_lo, bu_hi) = (u_lo + j0 as f64 * du, u_lo + (j1 + 1) as f64 * du);
    let mut edge_flags = no_flags();
    if i0 == 0 || j0 == 0 || i1 == n - 1 || j1 == n - 1 {
        edge_flags.truncated_tail = true;
    }

    let coarse = tensor_pass(
        &pieces(bu_lo, bu_hi, kink, cfg.panels, cfg.order),
        &gl_panels(bw_lo, bw_hi, cfg.panels, cfg.order),
        &point,
    )?;
    let fine = tensor_pass(
        &pieces(bu_lo, bu_hi, kink, 2 * cfg.panels, cfg.order),
        &gl_panels(bw_lo, bw_hi, 2 * cfg.panels, cfg.order),
        &point,
    )?;
    let scale = (-market.r * big_t).exp() * (-m * m * p.tau).exp();
    let diff = (fine.value - coarse.value).abs();
    let mut flags = fine.flags.union(coarse.flags).union(edge_flags);
    flags.quadrature = true;
    flags.exact = false;
    if tp < YOR_T_MIN {
        flags.unstable_small_t = true;
    }
    Ok(QuadPrice {
        price: scale * fine.value,
        est_error: scale * (diff + fine.kernel_error + truncation),
        refinement_diff: scale * diff,
        kernel_error: scale * fine.kernel_error,
        truncation_error: scale * truncation,
        flags,
    })
}

/// Geometric-average price by quadrature against the Kolmogorov kernel.
pub fn price_geometric_quadrature(
    option: &AsianOption,
    market: &Market,
    cfg: &PricingQuadConfig,
) -> Result<QuadPrice> {
    option.validate()?;
    if option.average != Average::Geometric {
        return Err(Error::Config(
            "price_geometric_quadrature needs a geometric average".into(),
        ));
    }
    let big_t = option.maturity;
    let sig2 = market.sigma * market.sigma;
    let nu = market.r - 0.5 * sig2;
    let beta = 2.0 / (sig2 * big_t);
    // payoff kink as αξ + β'η = γ
    let kink = match option.style {
        Style::FixedStrike if option.strike > 0.0 => Some((
            0.0,
            beta,
            option.strike.ln() - market.s0.ln() - 0.5 * nu * big_t,
        )),
        Style::FixedStrike => None,
        Style::FloatingStrike => Some((1.0, -beta, -0.5 * nu * big_t)),
    };
    geometric_integral(market, big_t, |s_t, g| payoff(option, s_t, g), kink, cfg)
}

/// `e^{−rT} E[f(S_T, G_T)]` with `G_T = exp((1/T)∫₀ᵀ log S dt)`, by quadrature.
pub fn geometric_expectation<F>(
    market: &Market,
    maturity: f64,
    f: F,
    cfg: &PricingQuadConfig,
) -> Result<QuadPrice>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    geometric_integral(market, maturity, f, None, cfg)
}

fn geometric_integral<F>(
    market: &Market,
    big_t: f64,
    f: F,
    kink: Option<(f64, f64, f64)>,
    cfg: &PricingQuadConfig,
) -> Result<QuadPrice>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    market.validate()?;
    if market.a0 != 0.0 {
        return Err(Error::Config(
            "geometric pricing is only defined at inception (A0 = 0)".into(),
        ));
    }
    if !(big_t > 0.0) || cfg.order < 2 || cfg.panels == 0 {
        return Err(Error::Config(format!(
            "invalid maturity {big_t} or quadrature config {cfg:?}"
        )));
    }
    let sig2 = market.sigma * market.sigma;
    let tau = 0.5 * sig2 * big_t;
    let nu = market.r - 0.5 * sig2;
    let ls0 = market.s0.ln();
    // log S_T = log S₀ + νT + ξ, log G = log S₀ + νT/2 + 2η/(σ²T), (ξ, η) from (0, 0)
    let beta = 2.0 / (sig2 * big_t);
    // whitening: ξ = l11 z1, η = l21 z1 + l22 z2
    let (l11, l21, l22) = (
        (2.0 * tau).sqrt(),
        tau.powf(1.5) / 2f64.sqrt(),
        tau.powf(1.5) / 6f64.sqrt(),
    );
    let jac = l11 * l22;
    // rotate so that the kink is the line s = const
    let (a1, a2, s_kink) = match kink {
        Some((al, be, ga)) => {
            let (a1, a2) = (al * l11 + be * l21, be * l22);
            let norm = a1.hypot(a2);
            (a1 / norm, a2 / norm, Some(ga / norm))
        }
        None => (1.0, 0.0, None),
    };
    let point = |s: f64, q: f64| -> Result<(f64, f64, KernelFlags)> {
        let (z1, z2) = (a1 * s - a2 * q, a2 * s + a1 * q);
        let xi = l11 * z1;
        let eta = l21 * z1 + l22 * z2;
        let k = kolmo_kernel([0.0, 0.0, tau], [xi, eta, 0.0]);
        let s_t = (ls0 + nu * big_t + xi).exp();
        let g = (ls0 + 0.5 * nu * big_t + beta * eta).exp();
        Ok((jac * k * f(s_t, g), 0.0, no_flags()))
    };
    // payoffs grow like e^{ξ}, which shifts the weight by at most √(2τ) in z
    let reach = 10.0 + 2.0 * (2.0 * tau).sqrt();
    let run = |panels: usize| {
        tensor_pass(
            &gl_panels(-reach, reach, panels, cfg.order),
            &pieces(-reach, reach, s_kink, panels, cfg.order),
            &point,
        )
    };
    let coarse = run(2 * cfg.panels)?;
    let fine = run(4 * cfg.panels)?;
    let d = (-market.r * big_t).exp();
    let diff = (fine.value - coarse.value).abs();
    if !fine.value.is_finite() {
        return Err(Error::NonFinite(format!(
            "geometric quadrature produced {}",
            fine.value
        )));
    }
    Ok(QuadPrice {
        price: d * fine.value,
        est_error: d * diff,
        refinement_diff: d * diff,
        kernel_error: 0.0,
        truncation_error: 0.0,
        flags: KernelFlags {
            quadrature: true,
            ..Default::default()
        },
    })
}

fn norm_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Closed form of the geometric-average option: `log S_T` and `log G` are jointly Gaussian.
pub fn geometric_closed_form(option: &AsianOption, market: &Market) -> Result<f64> {
    option.validate()?;
    market.validate()?;
    if option.average != Average::Geometric || market.a0 != 0.0 {
        return Err(Error::Config(
            "closed form needs a geometric average at inception".into(),
        ));
    }
    let t = option.maturity;
    let sig2 = market.sigma * market.sigma;
    let nu = market.r - 0.5 * sig2;
    let ls0 = market.s0.ln();
    // log G ~ N(mg, vg), log S_T ~ N(ms, vs), covariance σ²T/2
    let (mg, vg) = (ls0 + 0.5 * nu * t, sig2 * t / 3.0);
    let (ms, vs) = (ls0 + nu * t, sig2 * t);
    let cov = 0.5 * sig2 * t;
    let disc = (-market.r * t).exp();
    let lognormal_call = |m: f64, v: f64, k: f64| -> f64 {
        if k == 0.0 {
            return (m + 0.5 * v).exp();
        }
        let sd = v.sqrt();
        let d1 = (m - k.ln() + v) / sd;
        (m + 0.5 * v).exp() * norm_cdf(d1) - k * norm_cdf(d1 - sd)
    };
    // E[(e^{X₁} − e^{X₂})⁺]
    let exchange = |m1: f64, v1: f64, m2: f64, v2: f64| -> f64 {
        let s = (v1 + v2 - 2.0 * cov).sqrt();
        let d1 = (m1 - m2 + v1 - cov) / s;
        let d2 = (m1 - m2 - (v2 - cov)) / s;
        (m1 + 0.5 * v1).exp() * norm_cdf(d1) - (m2 + 0.5 * v2).exp() * norm_cdf(d2)
    };
    let k = option.strike;
    let v = match (option.style, option.right) {
        (Style::FixedStrike, Right::Call) => lognormal_call(mg, vg, k),
        // put-call parity on the forward
        (Style::FixedStrike, Right::Put) => lognormal_call(mg, vg, k) - (mg + 0.5 * vg).exp() + k,
        (Style::FloatingStrike, Right::Call) => exchange(ms, vs, mg, vg),
        (Style::FloatingStrike, Right::Put) => exchange(mg, vg, ms, vs),
    };
    Ok(disc * v)
}

/// Monte Carlo price under the risk-neutral lognormal dynamics.
pub fn price_monte_carlo(option: &AsianOption, market: &Market, mc: &McConfig) -> Result<McPrice> {
    option.validate()?;
    market.validate()?;
    let t = option.maturity;
    let cfg = McConfig { horizon: t, ..*mc };
    let model = SdeModel::constant(market.r, market.sigma);
    match option.average {
        Average::Arithmetic => {
            let a0 = market.a0;
            feynman_kac_price(
                |s, a| payoff(option, s, (a0 + a) / t),
                &model,
                market.r,
                market.s0,
                &cfg,
            )
        }
        Average::Geometric => {
            if market.a0 != 0.0 {
                return Err(Error::Config(
                    "geometric pricing is only defined at inception (A0 = 0)".into(),
                ));
            }
            let s = simulate_functional(
                &model.risk_neutral(market.r),
                market.s0,
                0.0,
                &cfg,
                false,
                f64::ln,
            )?;
            let v: Vec<f64> =
                s.x.iter()
                    .zip(&s.y)
                    .map(|(&st, &l)| payoff(option, st, (l / t).exp()))
                    .collect();
            let (m, se) = mean_and_se(&v);
            let d = (-market.r * t).exp();
            Ok(McPrice {
                price: d * m,
                std_error: d * se,
                n_paths: v.len(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Auto,
    Quadrature,
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PricingConfig {
    pub method: Method,
    pub quad: PricingQuadConfig,
    pub mc: McConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceReport {
    pub price: f64,
    pub est_error: f64,
    pub method: Method,
    pub flags: Vec<String>,
}

/// Dispatch on `cfg.method`. `Auto` uses quadrature, except that arithmetic
/// maturities below the kernel's stable range go to Monte Carlo with a warning flag.
pub fn price(option: &AsianOption, market: &Market, cfg: &PricingConfig) -> Result<PriceReport> {
    option.validate()?;
    market.validate()?;
    let tp = 0.25 * market.sigma * market.sigma * option.maturity;
    let short = option.average == Average::Arithmetic && tp < YOR_T_MIN;
    let method = match cfg.method {
        Method::Auto if short => Method::MonteCarlo,
        Method::Auto => Method::Quadrature,
        m => m,
    };
    let mut flags = Vec::new();
    if short {
        flags.push("short_maturity".to_string());
    }
    let (price, est_error) = match method {
        Method::Quadrature => {
            let q = match option.average {
                Average::Arithmetic => price_arithmetic_quadrature(option, market, &cfg.quad)?,
                Average::Geometric => price_geometric_quadrature(option, market, &cfg.quad)?,
            };
            let f = q.flags.to_string();
            flags.extend(f.split('|').filter(|s| *s != "none").map(String::from));
            (q.price, q.est_error)
        }
        Method::ClosedForm => match option.average {
            Average::Geometric => (geometric_closed_form(option, market)?, 0.0),
            Average::Arithmetic => {
                if !(option.style == Style::FixedStrike
                    && option.right == Right::Call
                    && option.strike == 0.0)
                {
                    return Err(Error::Config(
                        "arithmetic closed form exists only for the K = 0 fixed-strike call".into(),
                    ));
                }
                (k0_call_value(market, option.maturity), 0.0)
            }
        },
        Method::MonteCarlo | Method::Auto => {
            let p = price_monte_carlo(option, market, &cfg.mc)?;
            (p.price, p.std_error)
        }
    };
    Ok(PriceReport {
        price,
        est_error,
        method,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn opt(
        style: Style,
        right: Right,
        average: Average,
        strike: f64,
        maturity: f64,
    ) -> AsianOption {
        AsianOption {
            style,
            right,
            average,
            strike,
            maturity,
        }
    }

    fn mkt(r: f64, sigma: f64) -> Market {
        Market {
            s0: 100.0,
            a0: 0.0,
            r,
            sigma,
        }
    }

    #[test]
    fn payoff_examples() {
        let c = opt(
            Style::FixedStrike,
            Right::Call,
            Average::Arithmetic,
            0.0,
            1.0,
        );
        assert_eq!(payoff(&c, 5.0, 3.5), 3.5);
        let f = opt(
            Style::FloatingStrike,
            Right::Call,
            Average::Arithmetic,
            0.0,
            1.0,
        );
        assert_eq!(payoff(&f, 3.0, 3.0), 0.0);
        let p = opt(
            Style::FixedStrike,
            Right::Put,
            Average::Arithmetic,
            5.0,
            1.0,
        );
        assert_eq!(payoff(&p, 1.0, 3.0), 2.0);
    }

    #[test]
    fn reduction_round_trip() {
        let m = mkt(0.02, 0.3);
        for &(s, y, t) in &[(1.0, 0.0, 0.0), (120.0, 3.5, 0.4), (0.3, 11.0, 0.99)] {
            let p = reduce_to_l0(s, y, t, &m, 1.0).unwrap();
            let (s2, y2, t2) = from_l0(&p, &m, 1.0);
            assert_relative_eq!(s2, s, max_relative = 1e-12);
            assert_relative_eq!(y2, y, max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(t2, t, max_relative = 1e-12, epsilon = 1e-12);
        }
        assert_eq!(reduce_to_l0(50.0, 1.0, 2.0, &m, 2.0).unwrap().tau, 0.0);
        let neutral = mkt(0.045, 0.3);
        assert_relative_eq!(
            reduce_to_l0(70.0, 1.0, 0.3, &neutral, 1.0).unwrap().weight,
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn k0_value_limits() {
        assert_relative_eq!(
            k0_call_value(&mkt(0.0, 0.2), 2.0),
            100.0,
            max_relative = 1e-12
        );
        let v = k0_call_value(&mkt(0.05, 0.2), 1.0);
        assert_relative_eq!(
            v,
            (-0.05f64).exp() * 100.0 * (0.05f64.exp() - 1.0) / 0.05,
            max_relative = 1e-14
        );
    }

    #[test]
    fn geometric_closed_form_parity_and_unit_payoff() {
        let m = mkt(0.03, 0.5);
        let c = geometric_closed_form(
            &opt(
                Style::FixedStrike,
                Right::Call,
                Average::Geometric,
                90.0,
                2.0,
            ),
            &m,
        )
        .unwrap();
        let p = geometric_closed_form(
            &opt(
                Style::FixedStrike,
                Right::Put,
                Average::Geometric,
                90.0,
                2.0,
            ),
            &m,
        )
        .unwrap();
        let fwd = (100f64.ln() + 0.5 * (0.03 - 0.125) * 2.0 + 0.5 * 0.25 * 2.0 / 3.0).exp();
        assert_relative_eq!(c - p, (-0.06f64).exp() * (fwd - 90.0), max_relative = 1e-12);
        let fc = geometric_closed_form(
            &opt(
                Style::FloatingStrike,
                Right::Call,
                Average::Geometric,
                0.0,
                2.0,
            ),
            &m,
        )
        .unwrap();
        let fp = geometric_closed_form(
            &opt(
                Style::FloatingStrike,
                Right::Put,
                Average::Geometric,
                0.0,
                2.0,
            ),
            &m,
        )
        .unwrap();
        assert_relative_eq!(
            fc - fp,
            (-0.06f64).exp() * (100.0 * 0.06f64.exp() - fwd),
            max_relative = 1e-12
        );
    }

    #[test]
    fn invalid_inputs() {
        let m = mkt(0.03, 0.5);
        assert!(opt(
            Style::FixedStrike,
            Right::Call,
            Average::Geometric,
            -1.0,
            1.0
        )
        .validate()
        .is_err());
        assert!(opt(
            Style::FixedStrike,
            Right::Call,
            Average::Geometric,
            1.0,
            0.0
        )
        .validate()
        .is_err());
        assert!(Market { sigma: 0.0, ..m }.validate().is_err());
        let g = opt(
            Style::FixedStrike,
            Right::Call,
            Average::Geometric,
            1.0,
            1.0,
        );
        assert!(
            price_geometric_quadrature(&g, &Market { a0: 1.0, ..m }, &Default::default()).is_err()
        );
        assert!(price_arithmetic_quadrature(&g, &m, &Default::default()).is_err());
    }

    #[test]
    fn json_document_fields() {
        let doc = r#"{"option": {"style": "fixed_strike", "right": "call", "average": "arithmetic",
            "strike": 100, "maturity": 1}, "market": {"S0": 100, "A0": 0, "r": 0.05, "sigma": 0.4}}"#;
        let p: PricingInput = serde_json::from_str(doc).unwrap();
        assert_eq!(p.market.s0, 100.0);
        assert_eq!(p.option.style, Style::FixedStrike);
        assert!(serde_json::from_str::<PricingInput>(&doc.replace("\"r\"", "\"rate\"")).is_err());
    }
}

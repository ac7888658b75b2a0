//! Two-sided bounds for the fundamental solution and their empirical check.
//!
//! ```text
//! c⁻_ε/(x₀²(t−t₀)²) e^{−C⁻ Ψ(x, y+x₀ε(t−t₀), t−ε(t−t₀); z₀)}
//!     ≤ Γ(z; z₀) ≤
//! C⁺_ε/(x₀²(t−t₀)²) e^{−c⁺ Ψ(x, y−x₀ε, t+ε; z₀)}
//! ```
//!
//! on `x > 0`, `y < y₀ − x₀ε(t−t₀)`, `t₀ < t ≤ t₀ + T`. The constants are
//! configuration; [`calibrate_constants`] fits the tightest ones a grid allows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GPoint;
use crate::kernels::{gamma_mu, QuadratureConfig};
use crate::value::{psi, PsiValue};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub eps: f64,
    /// Exponent constant `C⁻` of the lower bound.
    #[serde(rename = "C_minus")]
    pub big_c_minus: f64,
    pub c_minus_eps: f64,
    /// Exponent constant `c⁺` of the upper bound.
    pub c_plus: f64,
    #[serde(rename = "C_plus_eps")]
    pub big_c_plus_eps: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub k_minus: f64,
    pub k_plus: f64,
    /// Horizon `T`: bounds are asserted for `t − t₀ ≤ T`.
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            eps: 0.1,
            big_c_minus: 1.0,
            c_minus_eps: 1.0,
            // 1/(16 M₁) with M₁ = sup a = 1 for L₀
            c_plus: 1.0 / 16.0,
            big_c_plus_eps: 1.0,
            mu_minus: 1.0,
            mu_plus: 1.0,
            k_minus: 1.0,
            k_plus: 1.0,
            horizon: 10.0,
        }
    }
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Config(format!(
                "eps must lie in (0,1), got {}",
                self.eps
            )));
        }
        let named = [
            ("C_minus", self.big_c_minus),
            ("c_minus_eps", self.c_minus_eps),
            ("c_plus", self.c_plus),
            ("C_plus_eps", self.big_c_plus_eps),
            ("mu_minus", self.mu_minus),
            ("mu_plus", self.mu_plus),
            ("k_minus", self.k_minus),
            ("k_plus", self.k_plus),
        ];
        for (name, v) in named {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::Config(format!(
                "T must be positive and finite, got {}",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// `z` lies in the support `ℝ⁺ × (−∞, y₀) × (t₀, t₀ + T]`.
pub fn support_check(z: &GPoint, pole: &GPoint, horizon: f64) -> bool {
    let dt = z.t() - pole.t();
    z.y() < pole.y() && dt > 0.0 && dt <= horizon
}

/// `z` lies in the region where the two-sided bound is asserted.
pub fn bound_admissible(cfg: &BoundsConfig, z: &GPoint, pole: &GPoint) -> bool {
    let dt = z.t() - pole.t();
    dt > 0.0 && dt <= cfg.horizon && z.y() < pole.y() - pole.x() * cfg.eps * dt
}

fn lower_shift(cfg: &BoundsConfig, z: &GPoint, pole: &GPoint) -> Result<GPoint> {
    let dt = z.t() - pole.t();
    GPoint::new(z.x(), z.y() + pole.x() * cfg.eps * dt, z.t() - cfg.eps * dt)
}

fn upper_shift(cfg: &BoundsConfig, z: &GPoint, pole: &GPoint) -> Result<GPoint> {
    GPoint::new(z.x(), z.y() - pole.x() * cfg.eps, z.t() + cfg.eps)
}

/// `Ψ` at the shifted argument of the lower bound.
pub fn lower_shifted_psi(cfg: &BoundsConfig, z: &GPoint, pole: &GPoint) -> Result<PsiValue> {
    psi(&lower_shift(cfg, z, pole)?, pole)
}

/// `Ψ` at the shifted argument of the upper bound.
pub fn upper_shifted_psi(cfg: &BoundsConfig, z: &GPoint, pole: &GPoint) -> Result<PsiValue> {
    psi(&upper_shift(cfg, z, pole)?, pole)
}

fn bound_value(constant: f64, exponent: f64, psi: PsiValue, z: &GPoint, pole: &GPoint) -> f64 {
    match psi {
        PsiValue::Infinite => 0.0,
        PsiValue::Finite(v) => {
            let dt = z.t() - pole.t();
            let log = constant.ln() - 2.0 * (pole.x() * dt).ln() - exponent * v;
            log.exp()
        }
    }
}

/// Lower side of the bound; `0` outside the admissible region.
pub fn lower_bound(cfg: &BoundsConfig, z: &GPoint, pole: &GPoint) -> Result<f64> {
    cfg.validate()?;
    if !bound_admissible(cfg, z, pole) {
        return Ok(0.0);
    }
    let p = lower_shifted_psi(cfg, z, pole)?;
    Ok(bound_value(cfg.c_minus_eps, cfg.big_c_minus, p, z, pole))
}

/// Upper side of the bound; `0` where `Γ` vanishes identically (`t ≤ t₀`).
pub fn upper_bound(cfg: &BoundsConfig, z: &GPoint, pole: &GPoint) -> Result<f64> {
    cfg.validate()?;
    if z.t() <= pole.t() {
        return Ok(0.0);
    }
    let p = upper_shifted_psi(cfg, z, pole)?;
    Ok(bound_value(cfg.big_c_plus_eps, cfg.c_plus, p, z, pole))
}

/// Comparison kernels `(k⁻Γ^{μ⁻}(shifted⁻), k⁺Γ^{μ⁺}(shifted⁺))` around `Γ`, with
/// `shifted⁻ = (x, y + x₀εd, t − εd)`, `shifted⁺ = (x, y − x₀ε'd, t + ε'd)`,
/// `d = t − t₀ + 1`, `ε' = ε/(1−ε)`.
pub fn sandwich_gamma_pm(
    cfg: &BoundsConfig,
    z: &GPoint,
    pole: &GPoint,
    qcfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    let d = z.t() - pole.t() + 1.0;
    let e = cfg.eps;
    let e2 = e / (1.0 - e);
    if !(z.y() + pole.x() * e * d < pole.y()) || !(z.t() > pole.t() + e2) {
        return Err(Error::Domain(format!(
            "{z} is outside the sandwich region y + x0 eps (t-t0+1) < y0, t > t0 + eps/(1-eps)"
        )));
    }
    let lo = GPoint::new(z.x(), z.y() + pole.x() * e * d, z.t() - e * d)?;
    let hi = GPoint::new(z.x(), z.y() - pole.x() * e2 * d, z.t() + e2 * d)?;
    let lower = cfg.k_minus * gamma_mu(cfg.mu_minus, &lo, pole, qcfg)?.value;
    let upper = cfg.k_plus * gamma_mu(cfg.mu_plus, &hi, pole, qcfg)?.value;
    Ok((lower, upper))
}

/// Tensor grid with `n[i]` equispaced nodes (endpoints included) per axis,
/// ordered x-major.
pub fn box_grid(lo: [f64; 3], hi: [f64; 3], n: [usize; 3]) -> Result<Vec<GPoint>> {
    let axis = |i: usize| -> Vec<f64> {
        if n[i] == 1 {
            vec![0.5 * (lo[i] + hi[i])]
        } else {
            (0..n[i])
                .map(|k| lo[i] + (hi[i] - lo[i]) * k as f64 / (n[i] - 1) as f64)
                .collect()
        }
    };
    if n.contains(&0) {
        return Err(Error::Config(
            "grid needs at least one node per axis".into(),
        ));
    }
    let (xs, ys, ts) = (axis(0), axis(1), axis(2));
    let mut out = Vec::with_capacity(n[0] * n[1] * n[2]);
    for &x in &xs {
        for &y in &ys {
            for &t in &ts {
                out.push(GPoint::new(x, y, t)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichRecord {
    pub point: GPoint,
    pub gamma: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub grid_size: usize,
    pub checked: usize,
    pub violations_lower: usize,
    pub violations_upper: usize,
    /// `min log(Γ/lower)`; negative means a violation.
    pub worst_margin_lower: f64,
    /// `min log(upper/Γ)`; negative means a violation.
    pub worst_margin_upper: f64,
    pub records: Vec<SandwichRecord>,
    /// Grid points outside the admissible region, skipped.
    pub excluded: Vec<GPoint>,
}

impl SandwichReport {
    pub fn violations(&self) -> usize {
        self.violations_lower + self.violations_upper
    }
}

fn log_margin(big: f64, small: f64) -> f64 {
    if small == 0.0 {
        f64::INFINITY
    } else if big == 0.0 {
        f64::NEG_INFINITY
    } else {
        (big / small).ln()
    }
}

/// Count `lower ≤ Γ ≤ upper` failures on the admissible part of `grid`.
pub fn check_sandwich(
    cfg: &BoundsConfig,
    grid: &[GPoint],
    pole: &GPoint,
    gamma_values: &[f64],
) -> Result<SandwichReport> {
    cfg.validate()?;
    if grid.len() != gamma_values.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: gamma_values.len(),
        });
    }
    let evaluated: Vec<Option<SandwichRecord>> = grid
        .par_iter()
        .zip(gamma_values.par_iter())
        .map(|(z, &g)| -> Result<Option<SandwichRecord>> {
            if !bound_admissible(cfg, z, pole) {
                return Ok(None);
            }
            Ok(Some(SandwichRecord {
                point: *z,
                gamma: g,
                lower: lower_bound(cfg, z, pole)?,
                upper: upper_bound(cfg, z, pole)?,
            }))
        })
        .collect::<Result<_>>()?;
    let mut report = SandwichReport {
        grid_size: grid.len(),
        checked: 0,
        violations_lower: 0,
        violations_upper: 0,
        worst_margin_lower: f64::INFINITY,
        worst_margin_upper: f64::INFINITY,
        records: Vec::new(),
        excluded: Vec::new(),
    };
    for (z, rec) in grid.iter().zip(evaluated) {
        match rec {
            None => report.excluded.push(*z),
            Some(r) => {
                report.checked += 1;
                if r.lower > r.gamma {
                    report.violations_lower += 1;
                }
                if r.gamma > r.upper {
                    report.violations_upper += 1;
                }
                report.worst_margin_lower =
                    report.worst_margin_lower.min(log_margin(r.gamma, r.lower));
                report.worst_margin_upper =
                    report.worst_margin_upper.min(log_margin(r.upper, r.gamma));
                report.records.push(r);
            }
        }
    }
    Ok(report)
}

/// Tightest constants `c⁻_ε` (min) and `C⁺_ε` (max) for which the bounds hold
/// on the admissible part of `grid`; exponent constants and the rest of the
/// configuration are taken from `base`.
pub fn calibrate_constants(
    base: &BoundsConfig,
    grid: &[GPoint],
    pole: &GPoint,
    gamma_values: &[f64],
) -> Result<BoundsConfig> {
    base.validate()?;
    if grid.len() != gamma_values.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: gamma_values.len(),
        });
    }
    let logs: Vec<Option<(f64, f64)>> = grid
        .par_iter()
        .zip(gamma_values.par_iter())
        .map(|(z, &g)| -> Result<Option<(f64, f64)>> {
            if !bound_admissible(base, z, pole) {
                return Ok(None);
            }
            if !(g > 0.0) {
                return Err(Error::Domain(format!(
                    "Γ must be positive on admissible points, got {g} at {z}"
                )));
            }
            let scale = g.ln() + 2.0 * (pole.x() * (z.t() - pole.t())).ln();
            let lo = match lower_shifted_psi(base, z, pole)? {
                PsiValue::Finite(p) => scale + base.big_c_minus * p,
                PsiValue::Infinite => f64::INFINITY,
            };
            let hi = match upper_shifted_psi(base, z, pole)? {
                PsiValue::Finite(p) => scale + base.c_plus * p,
                PsiValue::Infinite => {
                    return Err(Error::Domain(format!(
                        "upper-bound argument of {z} has no admissible path"
                    )))
                }
            };
            Ok(Some((lo, hi)))
        })
        .collect::<Result<_>>()?;
    let mut min_lo = f64::INFINITY;
    let mut max_hi = f64::NEG_INFINITY;
    let mut any = false;
    for (lo, hi) in logs.into_iter().flatten() {
        any = true;
        min_lo = min_lo.min(lo);
        max_hi = max_hi.max(hi);
    }
    if !any {
        return Err(Error::Domain(
            "no admissible grid points to calibrate on".into(),
        ));
    }
    // rounded outward so the calibration grid itself checks clean
    let mut cfg = *base;
    cfg.c_minus_eps = min_lo.exp() * (1.0 - 8.0 * f64::EPSILON);
    cfg.big_c_plus_eps = max_hi.exp() * (1.0 + 8.0 * f64::EPSILON);
    if !(cfg.c_minus_eps > 0.0 && cfg.c_minus_eps.is_finite() && cfg.big_c_plus_eps.is_finite()) {
        return Err(Error::NonFinite(format!(
            "calibrated constants out of range: log c- = {min_lo}, log C+ = {max_hi}"
        )));
    }
    Ok(cfg)
}

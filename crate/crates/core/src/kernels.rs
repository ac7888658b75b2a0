//! Explicit fundamental solutions.
//!
//! * Yor's joint density `p(w, a, t)` of `(W_t, ∫₀ᵗ e^{2W_s} ds)` and the
//!   kernel `Γ₀` of `L₀ = x²∂ₓₓ + x∂ₓ + x∂_y − ∂_t` built from it.
//! * The Kolmogorov kernel of `∂ₓₓ + x∂_y − ∂_t` and its `n`-dimensional,
//!   diffusion-`μ` family.
//! * `Γ^μ`, the kernel of `L^μ = μx²∂ₓₓ + x∂ₓ + x∂_y − ∂_t`, obtained from
//!   `Γ₀` by a time change and a Girsanov factor.
//!
//! Kernels are evaluated as functions of the first point `z = (x, y, t)`
//! with the pole `(ξ, η, τ)` held fixed; they vanish unless `t > τ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GPoint;
use crate::quadrature::{integrate_adaptive, CompensatedSum};

/// Below this time (in the units of `p`) the oscillatory integral loses
/// digits to cancellation and results are flagged.
pub const YOR_T_MIN: f64 = 0.25;

/// Default minimum `t − τ` and `η − y` for finite-difference residuals.
pub const MIN_POLE_SEPARATION: f64 = 0.05;

/// Hard cap on the number of half-periods summed by [`yor_psi`].
const MAX_HALF_PERIODS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Envelope level, relative to the largest half-period contribution,
    /// below which the tail is dropped.
    pub tail_cutoff: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-300,
            rel_tol: 1e-12,
            max_subdivisions: 64,
            tail_cutoff: 1e-18,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || !(self.tail_cutoff > 0.0) {
            return Err(Error::Config(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_subdivisions < 16 {
            return Err(Error::Config(format!(
                "max_subdivisions must be at least 16, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }
}

/// How a kernel value was obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelFlags {
    pub exact: bool,
    pub quadrature: bool,
    pub truncated_tail: bool,
    pub unstable_small_t: bool,
    /// A slightly negative quadrature result within its error was reported as 0.
    pub clamped_negative: bool,
}

impl KernelFlags {
    fn exact() -> Self {
        KernelFlags {
            exact: true,
            ..Default::default()
        }
    }

    /// Flags set in either; `exact` only if both are exact.
    pub fn union(self, o: KernelFlags) -> KernelFlags {
        KernelFlags {
            exact: self.exact && o.exact,
            quadrature: self.quadrature || o.quadrature,
            truncated_tail: self.truncated_tail || o.truncated_tail,
            unstable_small_t: self.unstable_small_t || o.unstable_small_t,
            clamped_negative: self.clamped_negative || o.clamped_negative,
        }
    }
}

impl std::fmt::Display for KernelFlags {
    /// `|`-separated flag names, or `none`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = [
            (self.exact, "exact"),
            (self.quadrature, "quadrature"),
            (self.truncated_tail, "truncated_tail"),
            (self.unstable_small_t, "unstable_small_t"),
            (self.clamped_negative, "clamped_negative"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join("|"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub value: f64,
    pub est_error: f64,
    pub flags: KernelFlags,
}

impl KernelEval {
    pub fn zero() -> Self {
        KernelEval {
            value: 0.0,
            est_error: 0.0,
            flags: KernelFlags::exact(),
        }
    }

    fn exact(value: f64) -> Self {
        KernelEval {
            value,
            est_error: 0.0,
            flags: KernelFlags::exact(),
        }
    }

    fn scaled(self, c: f64) -> Self {
        KernelEval {
            value: self.value * c,
            est_error: self.est_error * c.abs(),
            flags: self.flags,
        }
    }
}

/// The damped oscillatory integral split into half-periods.
#[derive(Debug, Clone)]
pub struct YorPsiTerms {
    /// `∫` over `[m t, (m+1) t]` of the integrand scaled by `e^{z}`.
    pub terms: Vec<f64>,
    pub errors: Vec<f64>,
    /// Envelope bound on the dropped tail (scaled by `e^{z}`).
    pub tail_bound: f64,
    pub truncated: bool,
}

fn envelope_scaled(xi: f64, z: f64, t: f64) -> f64 {
    // e^{z} · e^{−ξ²/2t − z cosh ξ} sinh ξ, with cosh ξ − 1 = 2 sinh²(ξ/2)
    let s = (0.5 * xi).sinh();
    (-xi * xi / (2.0 * t) - 2.0 * z * s * s).exp() * xi.sinh()
}

/// Half-period contributions of `e^{z} ψ(z, t)`.
pub fn yor_psi_terms(z: f64, t: f64, cfg: &QuadratureConfig) -> Result<YorPsiTerms> {
    if !(z > 0.0) || !z.is_finite() || !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "yor_psi needs z > 0 and t > 0, got z={z}, t={t}"
        )));
    }
    cfg.validate()?;
    let freq = PI / t;
    let integrand = |xi: f64| envelope_scaled(xi, z, t) * (freq * xi).sin();
    let mut terms = Vec::new();
    let mut errors = Vec::new();
    let mut running_max: f64 = 0.0;
    let mut truncated = false;
    let mut tail_bound = 0.0;
    for m in 0..MAX_HALF_PERIODS {
        let (a, b) = (m as f64 * t, (m + 1) as f64 * t);
        let env_a = envelope_scaled(a, z, t);
        // the log-derivative of the envelope is decreasing, so once it is
        // negative the envelope decays monotonically
        let past_peak = -a / t - z * a.sinh()
            + if a > 0.0 {
                1.0 / a.tanh()
            } else {
                f64::INFINITY
            }
            < 0.0;
        if m > 0 && past_peak && env_a * t <= cfg.tail_cutoff * running_max {
            truncated = true;
            // alternating tail with decreasing envelope: bounded by its first term
            tail_bound = env_a * t;
            break;
        }
        if m > 0 && env_a == 0.0 && past_peak {
            break;
        }
        let r = integrate_adaptive(
            &integrand,
            a,
            b,
            cfg.abs_tol,
            cfg.rel_tol,
            cfg.max_subdivisions,
        )?;
        running_max = running_max.max(r.value.abs());
        terms.push(r.value);
        errors.push(r.error);
        if m + 1 == MAX_HALF_PERIODS {
            return Err(Error::Quadrature(format!(
                "yor_psi did not reach the tail cutoff in {MAX_HALF_PERIODS} half-periods (z={z}, t={t})"
            )));
        }
    }
    Ok(YorPsiTerms {
        terms,
        errors,
        tail_bound,
        truncated,
    })
}

/// `e^{z}·ψ(z, t)` with its error estimate.
fn yor_psi_scaled(z: f64, t: f64, cfg: &QuadratureConfig) -> Result<KernelEval> {
    let parts = yor_psi_terms(z, t, cfg)?;
    let sum: CompensatedSum = parts.terms.iter().copied().collect();
    let quad_err: f64 = parts.errors.iter().sum();
    let rounding = 4.0 * f64::EPSILON * sum.abs_sum();
    let mut est_error = quad_err + rounding + parts.tail_bound;
    let unstable = t < YOR_T_MIN;
    if unstable {
        // cancellation across half-periods dominates; be conservative
        est_error = est_error.max(1e3 * f64::EPSILON * sum.abs_sum());
    }
    Ok(KernelEval {
        value: sum.value(),
        est_error,
        flags: KernelFlags {
            quadrature: true,
            truncated_tail: parts.truncated,
            unstable_small_t: unstable,
            ..Default::default()
        },
    })
}

/// `ψ(z, t) = ∫₀^∞ e^{−ξ²/2t} e^{−z cosh ξ} sinh ξ sin(πξ/t) dξ`.
///
/// The value is not clamped; it may be negative by round-off.
pub fn yor_psi(z: f64, t: f64, cfg: &QuadratureConfig) -> Result<KernelEval> {
    let e = (-z).exp();
    Ok(yor_psi_scaled(z, t, cfg)?.scaled(e))
}

fn clamp_density(mut k: KernelEval) -> Result<KernelEval> {
    if k.value < 0.0 {
        if -k.value <= k.est_error {
            k.est_error = k.est_error.max(-k.value);
            k.value = 0.0;
            k.flags.clamped_negative = true;
        } else {
            return Err(Error::NegativeDensity {
                value: k.value,
                est_error: k.est_error,
            });
        }
    }
    Ok(k)
}

/// Joint density of `(W_t, A_t)`, `A_t = ∫₀ᵗ e^{2W_s} ds`, at `(w, y)`:
///
/// `p = e^{π²/2t}/(π√(2πt)) · exp(−(1+e^{2w})/(2y)) · e^w/y² · ψ(e^w/y, t)`.
pub fn yor_density(w: f64, y: f64, t: f64, cfg: &QuadratureConfig) -> Result<KernelEval> {
    if !(y > 0.0) || !(t > 0.0) || !w.is_finite() || !y.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!(
            "yor_density needs y > 0 and t > 0, got w={w}, y={y}, t={t}"
        )));
    }
    let ew = w.exp();
    let z = ew / y;
    if !(z > 0.0) || !z.is_finite() {
        // e^{−(1+e^w)²/2y} underflows long before z leaves the floating range
        return Ok(KernelEval::zero());
    }
    // exp(−(1+e^{2w})/(2y)) · e^{−z} = exp(−(1+e^w)²/(2y))
    let log_pref = PI * PI / (2.0 * t) - (1.0 + ew) * (1.0 + ew) / (2.0 * y) + w
        - 2.0 * y.ln()
        - (PI * (2.0 * PI * t).sqrt()).ln();
    let pref = log_pref.exp();
    if pref == 0.0 {
        let mut k = KernelEval::zero();
        k.flags.exact = false;
        k.flags.truncated_tail = true;
        return Ok(k);
    }
    clamp_density(yor_psi_scaled(z, t, cfg)?.scaled(pref))
}

/// `Γ₀((x,y,t); (ξ,η,τ)) = p(½log(ξ/x), (η−y)/(2x), (t−τ)/2) / (4xξ)`,
/// zero unless `t > τ` and `y < η`.
pub fn gamma0(z: &GPoint, pole: &GPoint, cfg: &QuadratureConfig) -> Result<KernelEval> {
    let (x, y, t) = z.as_tuple();
    let (x0, y0, t0) = pole.as_tuple();
    if t <= t0 || y >= y0 {
        return Ok(KernelEval::zero());
    }
    let p = yor_density(
        0.5 * (x0 / x).ln(),
        (y0 - y) / (2.0 * x),
        (t - t0) / 2.0,
        cfg,
    )?;
    Ok(p.scaled(1.0 / (4.0 * x * x0)))
}

/// Kolmogorov kernel of `∂ₓₓ + x∂_y − ∂_t` with `z = (x, y, t)` and pole
/// `(ξ, η, τ)`.
pub fn kolmo_kernel(z: [f64; 3], pole: [f64; 3]) -> f64 {
    kolmo_kernel_mu(1.0, &[z[0]], &[z[1]], z[2], &[pole[0]], &[pole[1]], pole[2])
        .expect("scalar arguments have matching lengths")
}

/// Kernel of `μΔₓ + ⟨x, ∇_y⟩ − ∂_t` on `ℝⁿ × ℝⁿ × ℝ`:
///
/// `3^{n/2}/((2πμ)ⁿ s^{2n}) · exp(−(|x−ξ|²/s + 12|y−η+s(x+ξ)/2|²/s³)/(4μ))`,
/// `s = t − τ`.
pub fn kolmo_kernel_mu(
    mu: f64,
    x: &[f64],
    y: &[f64],
    t: f64,
    xi: &[f64],
    eta: &[f64],
    tau: f64,
) -> Result<f64> {
    let n = x.len();
    for len in [y.len(), xi.len(), eta.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: len,
            });
        }
    }
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let s = t - tau;
    if !(s > 0.0) {
        return Ok(0.0);
    }
    let mut q = 0.0;
    for i in 0..n {
        let dx = x[i] - xi[i];
        let dy = y[i] - eta[i] + 0.5 * s * (x[i] + xi[i]);
        q += dx * dx / s + 12.0 * dy * dy / (s * s * s);
    }
    let nf = n as f64;
    let norm = 3f64.powf(0.5 * nf) / ((2.0 * PI * mu).powi(n as i32) * s.powi(2 * n as i32));
    Ok(norm * (-q / (4.0 * mu)).exp())
}

/// Exponent `m = ½ − 1/(2μ)` of the Girsanov factor relating `Γ^μ` to `Γ₀`.
pub fn gamma_mu_exponent(mu: f64) -> f64 {
    0.5 - 0.5 / mu
}

/// Kernel of `L^μ = μx²∂ₓₓ + x∂ₓ + x∂_y − ∂_t`:
///
/// `Γ^μ = μ (x/ξ)^m e^{−m²μ(t−τ)} Γ₀((x, μy, μt); (ξ, μη, μτ))`.
pub fn gamma_mu(mu: f64, z: &GPoint, pole: &GPoint, cfg: &QuadratureConfig) -> Result<KernelEval> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    if mu == 1.0 {
        return gamma0(z, pole, cfg);
    }
    let (x, y, t) = z.as_tuple();
    let (x0, y0, t0) = pole.as_tuple();
    if t <= t0 || y >= y0 {
        return Ok(KernelEval::zero());
    }
    let m = gamma_mu_exponent(mu);
    let g = gamma0(
        &GPoint::new(x, mu * y, mu * t)?,
        &GPoint::new(x0, mu * y0, mu * t0)?,
        cfg,
    )?;
    let factor = mu * (m * (x / x0).ln() - m * m * mu * (t - t0)).exp();
    Ok(g.scaled(factor))
}

/// Which kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    Gamma0,
    Kolmogorov,
    KolmogorovMu { mu: f64 },
    GammaMu { mu: f64 },
}

impl KernelSpec {
    /// Evaluate at `z` with pole `pole` (both as raw triples; `Γ₀`/`Γ^μ`
    /// require positive first coordinates).
    pub fn evaluate(
        &self,
        z: [f64; 3],
        pole: [f64; 3],
        cfg: &QuadratureConfig,
    ) -> Result<KernelEval> {
        match *self {
            KernelSpec::Gamma0 => gamma0(&to_point(z)?, &to_point(pole)?, cfg),
            KernelSpec::GammaMu { mu } => gamma_mu(mu, &to_point(z)?, &to_point(pole)?, cfg),
            KernelSpec::Kolmogorov => Ok(KernelEval::exact(kolmo_kernel(z, pole))),
            KernelSpec::KolmogorovMu { mu } => Ok(KernelEval::exact(kolmo_kernel_mu(
                mu,
                &[z[0]],
                &[z[1]],
                z[2],
                &[pole[0]],
                &[pole[1]],
                pole[2],
            )?)),
        }
    }
}

fn to_point(p: [f64; 3]) -> Result<GPoint> {
    GPoint::new(p[0], p[1], p[2])
}

/// A finite-difference operator residual and the magnitude of its largest term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub residual: f64,
    /// `max` of the absolute values of the individual operator terms.
    pub scale: f64,
    /// Accumulated kernel evaluation error propagated through the stencil.
    pub noise: f64,
}

struct Stencil {
    f: f64,
    fx: f64,
    fxx: f64,
    fy: f64,
    ft: f64,
    noise: [f64; 3],
}

fn stencil<F: Fn(f64, f64, f64) -> Result<KernelEval>>(
    f: F,
    x: f64,
    y: f64,
    t: f64,
    h: f64,
) -> Result<Stencil> {
    let c = f(x, y, t)?;
    let xp = f(x + h, y, t)?;
    let xm = f(x - h, y, t)?;
    let yp = f(x, y + h, t)?;
    let ym = f(x, y - h, t)?;
    let tp = f(x, y, t + h)?;
    let tm = f(x, y, t - h)?;
    Ok(Stencil {
        f: c.value,
        fx: (xp.value - xm.value) / (2.0 * h),
        fxx: (xp.value - 2.0 * c.value + xm.value) / (h * h),
        fy: (yp.value - ym.value) / (2.0 * h),
        ft: (tp.value - tm.value) / (2.0 * h),
        noise: [
            (xp.est_error + 2.0 * c.est_error + xm.est_error) / (h * h),
            (yp.est_error + ym.est_error) / (2.0 * h),
            (tp.est_error + tm.est_error) / (2.0 * h),
        ],
    })
}

fn check_separation(
    z: [f64; 3],
    pole: [f64; 3],
    h: f64,
    min_separation: f64,
    positive_x: bool,
) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    let sep = min_separation.max(2.0 * h);
    if z[2] - pole[2] < sep {
        return Err(Error::Domain(format!(
            "t − τ = {} is below the separation {sep}",
            z[2] - pole[2]
        )));
    }
    if positive_x && (pole[1] - z[1] < sep || z[0] <= 2.0 * h) {
        return Err(Error::Domain(format!(
            "point ({}, {}, {}) is too close to the support boundary",
            z[0], z[1], z[2]
        )));
    }
    Ok(())
}

/// Central-difference `L^μ Γ^μ` at `z`; [`pde_residual_l0`] is the `μ = 1` case.
pub fn pde_residual_lmu_with(
    mu: f64,
    z: &GPoint,
    pole: &GPoint,
    h: f64,
    min_separation: f64,
    cfg: &QuadratureConfig,
) -> Result<Residual> {
    let (x, y, t) = z.as_tuple();
    let (zp, pp) = ([x, y, t], [pole.x(), pole.y(), pole.t()]);
    check_separation(zp, pp, h, min_separation, true)?;
    let s = stencil(
        |a, b, c| gamma_mu(mu, &GPoint::new(a, b, c)?, pole, cfg),
        x,
        y,
        t,
        h,
    )?;
    let terms = [mu * x * x * s.fxx, x * s.fx, x * s.fy, -s.ft];
    let _ = s.f;
    Ok(Residual {
        residual: terms.iter().sum(),
        scale: terms.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        noise: mu * x * x * s.noise[0] + x * s.noise[1] + s.noise[2],
    })
}

pub fn pde_residual_lmu(
    mu: f64,
    z: &GPoint,
    pole: &GPoint,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<Residual> {
    pde_residual_lmu_with(mu, z, pole, h, MIN_POLE_SEPARATION, cfg)
}

/// Central-difference `L₀ Γ₀` at `z`, `L₀ = x²∂ₓₓ + x∂ₓ + x∂_y − ∂_t`.
pub fn pde_residual_l0(
    z: &GPoint,
    pole: &GPoint,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<Residual> {
    pde_residual_lmu_with(1.0, z, pole, h, MIN_POLE_SEPARATION, cfg)
}

/// Central-difference `(∂ₓₓ + x∂_y − ∂_t)` applied to [`kolmo_kernel`] at `z`.
pub fn pde_residual_kolmo(z: [f64; 3], pole: [f64; 3], h: f64) -> Result<Residual> {
    check_separation(z, pole, h, MIN_POLE_SEPARATION, false)?;
    let s = stencil(
        |a, b, c| Ok(KernelEval::exact(kolmo_kernel([a, b, c], pole))),
        z[0],
        z[1],
        z[2],
        h,
    )?;
    let terms = [s.fxx, z[0] * s.fy, -s.ft];
    Ok(Residual {
        residual: terms.iter().sum(),
        scale: terms.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        noise: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn p(x: f64, y: f64, t: f64) -> GPoint {
        GPoint::new(x, y, t).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let mut c = cfg();
        c.max_subdivisions = 8;
        assert!(c.validate().is_err());
        c = cfg();
        c.rel_tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn yor_psi_rejects_bad_domain() {
        assert!(yor_psi(0.0, 1.0, &cfg()).is_err());
        assert!(yor_psi(1.0, -1.0, &cfg()).is_err());
    }

    #[test]
    fn yor_psi_flags() {
        let k = yor_psi(1.0, 1.0, &cfg()).unwrap();
        assert!(k.flags.quadrature && k.flags.truncated_tail && !k.flags.unstable_small_t);
        let k = yor_psi(1.0, 0.1, &cfg()).unwrap();
        assert!(k.flags.unstable_small_t);
        assert_eq!(
            k.flags.to_string(),
            "quadrature|truncated_tail|unstable_small_t"
        );
    }

    #[test]
    fn yor_psi_decays_in_z() {
        let mut last = f64::INFINITY;
        // |ψ| ≤ e^{−z} ∫ e^{−ξ²/2} sinh ξ dξ < 1.5 e^{−z}, a bound decreasing in z
        for z in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let v = yor_psi(z, 1.0, &cfg()).unwrap().value;
            assert!(v.abs() <= 1.5 * (-z).exp());
            assert!(v.abs() < last);
            last = v.abs();
        }
    }

    #[test]
    fn gamma0_support() {
        let pole = GPoint::IDENTITY;
        assert_eq!(gamma0(&p(1.3, 0.5, 1.0), &pole, &cfg()).unwrap().value, 0.0);
        assert_eq!(
            gamma0(&p(1.3, -0.5, -0.1), &pole, &cfg()).unwrap().value,
            0.0
        );
        assert!(gamma0(&p(1.3, -0.5, 1.0), &pole, &cfg()).unwrap().value > 0.0);
    }

    #[test]
    fn kolmo_examples() {
        assert_relative_eq!(
            kolmo_kernel([0.0, 0.0, 1.0], [0.0, 0.0, 0.0]),
            3f64.sqrt() / (2.0 * PI),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            kolmo_kernel([0.0, 0.0, 1.0], [0.0, 0.0, 0.0]),
            0.2756644,
            max_relative = 1e-6
        );
        assert_eq!(kolmo_kernel([0.0, 0.0, 0.0], [0.0, 0.0, 0.0]), 0.0);
        assert_eq!(kolmo_kernel([0.0, 0.0, -1.0], [0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn kolmo_mu_diagonal() {
        let (mu, s, x) = (0.7, 0.8, 1.3);
        // x = ξ and y = η − s x make both exponents vanish
        let v = kolmo_kernel_mu(mu, &[x], &[0.4 - s * x], s, &[x], &[0.4], 0.0).unwrap();
        assert_relative_eq!(
            v,
            3f64.sqrt() / (2.0 * PI * mu) / (s * s),
            max_relative = 1e-14
        );
        assert!(kolmo_kernel_mu(mu, &[x], &[0.0, 1.0], s, &[x], &[0.4], 0.0).is_err());
    }

    #[test]
    fn kolmo_mu_homogeneity() {
        let (x, y, t) = ([0.3, -0.4], [0.1, 0.5], 0.9);
        let (xi, eta, tau) = ([0.2, 0.1], [0.7, -0.2], 0.1);
        let base = kolmo_kernel_mu(1.4, &x, &y, t, &xi, &eta, tau).unwrap();
        for r in [0.5, 2.0, 3.0] {
            let sc = |v: &[f64], k: i32| v.iter().map(|a| a * f64::powi(r, k)).collect::<Vec<_>>();
            let v = kolmo_kernel_mu(
                1.4,
                &sc(&x, 1),
                &sc(&y, 3),
                r * r * t,
                &sc(&xi, 1),
                &sc(&eta, 3),
                r * r * tau,
            )
            .unwrap();
            assert_relative_eq!(v, base * r.powi(-8), max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_mu_identity_at_one() {
        let (z, pole) = (p(1.2, -0.7, 1.1), p(0.9, 0.2, 0.0));
        let a = gamma_mu(1.0, &z, &pole, &cfg()).unwrap().value;
        let b = gamma0(&z, &pole, &cfg()).unwrap().value;
        assert_eq!(a, b);
        assert_eq!(
            gamma_mu(2.0, &p(1.0, 0.5, 1.0), &GPoint::IDENTITY, &cfg())
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn kernel_spec_dispatch() {
        let v = KernelSpec::Kolmogorov
            .evaluate([0.0, 0.0, 1.0], [0.0; 3], &cfg())
            .unwrap();
        assert!(v.flags.exact);
        assert!(KernelSpec::Gamma0
            .evaluate([-1.0, 0.0, 1.0], [1.0, 0.0, 0.0], &cfg())
            .is_err());
    }

    #[test]
    fn residual_rejects_near_pole() {
        assert!(pde_residual_l0(&p(1.0, -0.5, 0.01), &GPoint::IDENTITY, 1e-3, &cfg()).is_err());
        assert!(pde_residual_l0(&p(1.0, -0.01, 1.0), &GPoint::IDENTITY, 1e-3, &cfg()).is_err());
    }
}

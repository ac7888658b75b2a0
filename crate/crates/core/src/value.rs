//! The value function `Ψ` of the minimum-energy control problem
//!
//! ```text
//! ẋ = ω x,  ẏ = x,  ṫ = −1,      Ψ(start; end) = min ∫ ω² ds,
//! ```
//!
//! steering `start = (x₁, y₁, t₁)` to `end = (x₀, y₀, t₀)`, together with the
//! Pontryagin synthesis of the optimal trajectory.
//!
//! Every instance is first reduced to the normalized problem (end point
//! `(1, 0)`, horizon `2`) by a left translation followed by a dilation. In
//! normalized coordinates the conserved Hamiltonian is `r = g⁻¹(v)` with
//! `v = (y₀−y₁)/(T√(x₁x₀))`, and both branches of the closed-form cost collapse
//! to
//!
//! ```text
//! Ψ = 4r/T + 4(x₁+x₀)/(y₀−y₁) − 8 C(r) / (v T),
//! C(r) = cosh√r (r > 0),  1 (r = 0),  cos√−r (r < 0),
//! ```
//!
//! since `√(E + 4x₁x₀/(y₀−y₁)²) = 2√(x₁x₀)|C(r)|/(y₀−y₁)` and the branch
//! switch at `E = −π²/T²` is exactly the sign change of `cos√−r`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GPoint;

const PI2: f64 = PI * PI;

/// `|r|` below which `g` and `g'` are evaluated from their Taylor series.
const SERIES_RADIUS: f64 = 1.0;

/// `g(r) = sinh(√r)/√r`, continued through `1` at `0` to `sin(√−r)/√−r`.
pub fn eval_g(r: f64) -> Result<f64> {
    if !(r > -PI2) || r.is_nan() {
        return Err(Error::Domain(format!(
            "g is defined on (-pi^2, inf), got {r}"
        )));
    }
    Ok(g_unchecked(r))
}

fn g_unchecked(r: f64) -> f64 {
    if r.abs() <= SERIES_RADIUS {
        // Σ rⁿ/(2n+1)!
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..30 {
            term *= r / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else if r > 0.0 {
        let s = r.sqrt();
        s.sinh() / s
    } else {
        let s = (-r).sqrt();
        s.sin() / s
    }
}

/// Derivative of [`eval_g`].
pub fn eval_g_prime(r: f64) -> Result<f64> {
    if !(r > -PI2) {
        return Err(Error::Domain(format!(
            "g is defined on (-pi^2, inf), got {r}"
        )));
    }
    if r.abs() <= SERIES_RADIUS {
        // Σ n rⁿ⁻¹/(2n+1)!
        let mut fact_term = 1.0 / 6.0; // r^0/3!
        let mut sum = fact_term;
        for n in 2..30 {
            fact_term *= r / ((2 * n) as f64 * (2 * n + 1) as f64);
            let t = n as f64 * fact_term;
            sum += t;
            if t.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        Ok(sum)
    } else if r > 0.0 {
        let s = r.sqrt();
        Ok((s * s.cosh() - s.sinh()) / (2.0 * r * s))
    } else {
        let s = (-r).sqrt();
        Ok((s * s.cos() - s.sin()) / (2.0 * r * s))
    }
}

/// `C(r) = cosh√r`, `1`, `cos√−r`; the companion of `g` with `C² − r g² = 1`.
fn companion(r: f64) -> f64 {
    if r > 0.0 {
        r.sqrt().cosh()
    } else if r < 0.0 {
        (-r).sqrt().cos()
    } else {
        1.0
    }
}

/// Inverse of [`eval_g`] on `(0, ∞)`.
///
/// Bisection down to a bracket of width `1e-3`, then safeguarded Newton
/// iterations to a relative tolerance of `1e-13`.
pub fn invert_g(v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!(
            "g^-1 is defined on (0, inf), got {v}"
        )));
    }
    if v == 1.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = if v < 1.0 {
        (-PI2, 0.0)
    } else {
        let mut hi = 4.0;
        while g_unchecked(hi) < v {
            hi *= 4.0;
            if !hi.is_finite() {
                return Err(Error::Domain(format!("g^-1({v}) overflows")));
            }
        }
        (0.0, hi)
    };
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if g_unchecked(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = g_unchecked(r) - v;
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let mut next = r - f / eval_g_prime(r)?;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - r).abs();
        r = next;
        if step <= 1e-15 * r.abs().max(1e-3) || hi - lo <= 4.0 * f64::EPSILON * r.abs() {
            break;
        }
    }
    Ok(r)
}

/// Which closed-form branch of the cost the optimal extremal lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `E ≥ −π²/T²`.
    First,
    /// `−4π²/T² < E < −π²/T²`.
    Second,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::First => f.write_str("first"),
            Branch::Second => f.write_str("second"),
        }
    }
}

/// A value of `Ψ`, with `+∞` kept distinct from floating-point overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiValue {
    Finite(f64),
    /// No admissible path joins the two points.
    Infinite,
}

impl PsiValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, PsiValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            PsiValue::Finite(v) => Some(v),
            PsiValue::Infinite => None,
        }
    }

    /// `exp(−c Ψ)`, which is exactly zero when `Ψ = +∞`.
    pub fn decay(&self, c: f64) -> f64 {
        match *self {
            PsiValue::Finite(v) => (-c * v).exp(),
            PsiValue::Infinite => 0.0,
        }
    }
}

/// Finite values as numbers, `+∞` as the string `"inf"`.
impl Serialize for PsiValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            PsiValue::Finite(v) => s.serialize_f64(v),
            PsiValue::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PsiValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(PsiValue::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(PsiValue::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

impl std::fmt::Display for PsiValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PsiValue::Finite(v) => write!(f, "{v}"),
            PsiValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Endpoint data reduced to the normalized problem.
#[derive(Debug, Clone, Copy)]
struct Reduced {
    /// `x₁/x₀`
    x1: f64,
    /// `2(y₁−y₀)/(x₀T)`, negative
    y1: f64,
    /// `t₁ − t₀`
    horizon: f64,
    /// `(y₀−y₁)/(T√(x₁x₀))`
    ratio: f64,
}

fn reduce(start: &GPoint, end: &GPoint) -> Result<Reduced> {
    let horizon = start.t() - end.t();
    let gap = end.y() - start.y();
    if !(horizon > 0.0) || !(gap > 0.0) {
        return Err(Error::NoAdmissiblePath);
    }
    let ratio = gap / (horizon * (start.x() * end.x()).sqrt());
    Ok(Reduced {
        x1: start.x() / end.x(),
        y1: -2.0 * gap / (end.x() * horizon),
        horizon,
        ratio,
    })
}

/// Conserved Hamiltonian of the optimal extremal,
/// `E = 4/(t−t₀)² · g⁻¹((y₀−y)/((t−t₀)√(x x₀)))`.
///
/// Fails with [`Error::NoAdmissiblePath`] unless `t > t₀` and `y < y₀`.
pub fn energy(start: &GPoint, end: &GPoint) -> Result<f64> {
    let red = reduce(start, end)?;
    Ok(4.0 / (red.horizon * red.horizon) * invert_g(red.ratio)?)
}

/// The value function `Ψ(start; end)`; `+∞` when no admissible path exists.
pub fn psi(start: &GPoint, end: &GPoint) -> Result<PsiValue> {
    let red = match reduce(start, end) {
        Ok(r) => r,
        Err(Error::NoAdmissiblePath) => return Ok(PsiValue::Infinite),
        Err(e) => return Err(e),
    };
    let r = invert_g(red.ratio)?;
    let gap = end.y() - start.y();
    let t = red.horizon;
    let value =
        4.0 * r / t + 4.0 * (start.x() + end.x()) / gap - 8.0 * companion(r) / (red.ratio * t);
    // the closed form is exactly zero on the zero-control ray; only round-off can push it negative
    Ok(PsiValue::Finite(value.max(0.0)))
}

/// Full Pontryagin solution for one `(start, end)` pair.
///
/// `energy`, `k` and `c` are expressed in the left-translated frame where the
/// end point is `(1, 0, 0)` (horizon unchanged), so `energy = k² + 2c` and
/// `cost = energy·T + 2c·y₁` with `y₁` the translated start ordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSynthesis {
    pub energy: f64,
    pub k: f64,
    pub c: f64,
    pub cost: f64,
    pub branch: Branch,
}

impl ControlSynthesis {
    pub fn hamiltonian_residual(&self) -> f64 {
        self.energy - (self.k * self.k + 2.0 * self.c)
    }
}

/// Final covector `(k, c)` of the normalized problem (end `(1,0)`, horizon 2).
pub fn optimal_covector(energy: f64, x1: f64, y1: f64) -> Result<(f64, f64)> {
    if !(x1 > 0.0) || !(y1 < 0.0) {
        return Err(Error::Domain(format!(
            "need x1 > 0 and y1 < 0, got ({x1}, {y1})"
        )));
    }
    let disc = energy * y1 * y1 + 4.0 * x1;
    if disc < -1e-12 * 4.0 * x1 {
        return Err(Error::Domain(format!("E y1^2 + 4 x1 = {disc} < 0")));
    }
    let root = disc.max(0.0).sqrt();
    let k = if energy >= -PI2 / 4.0 {
        (root - 2.0) / y1
    } else {
        -(root + 2.0) / y1
    };
    Ok((k, 0.5 * (energy - k * k)))
}

struct Normalized {
    red: Reduced,
    /// Hamiltonian in normalized coordinates, `g⁻¹(v)`.
    r: f64,
    k: f64,
    c: f64,
}

fn normalized(start: &GPoint, end: &GPoint) -> Result<Normalized> {
    let red = reduce(start, end)?;
    let r = invert_g(red.ratio)?;
    // √(E y₁² + 4 x₁) = 2√x₁ |C(r)|; keeping the sign of C selects the branch
    let k = (2.0 * red.x1.sqrt() * companion(r) - 2.0) / red.y1;
    let c = 0.5 * (r - k * k);
    Ok(Normalized { red, r, k, c })
}

/// Pontryagin synthesis: Hamiltonian, final covector, cost and branch.
pub fn synthesize(start: &GPoint, end: &GPoint) -> Result<ControlSynthesis> {
    let n = normalized(start, end)?;
    // undo the dilation by T/2: E scales by (2/T)², k by 2/T, c by (2/T)², cost by 2/T
    let s = 2.0 / n.red.horizon;
    let cost = psi(start, end)?.finite().ok_or(Error::NoAdmissiblePath)?;
    Ok(ControlSynthesis {
        energy: n.r * s * s,
        k: n.k * s,
        c: n.c * s * s,
        cost,
        branch: if n.r >= -PI2 / 4.0 {
            Branch::First
        } else {
            Branch::Second
        },
    })
}

/// One sample of an optimal trajectory in the original coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    /// Path parameter in `[0, T]`; the time coordinate is `t₁ − s`.
    pub s: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub lambda1: f64,
    /// Constant covector component `λ₂`.
    pub lambda2: f64,
    /// Control `ω = λ₁ x`.
    pub omega: f64,
}

impl TrajectorySample {
    /// `λ₁² x² + 2 λ₂ x`, conserved along an extremal.
    pub fn hamiltonian(&self) -> f64 {
        self.lambda1 * self.lambda1 * self.x * self.x + 2.0 * self.lambda2 * self.x
    }
}

fn sample(nz: &Normalized, start: &GPoint, end: &GPoint, sigma: f64) -> Result<TrajectorySample> {
    let scale = 0.5 * nz.red.horizon; // s = scale · σ
    let to_go = 2.0 - sigma;
    let q = nz.r * to_go * to_go / 4.0;
    let g = eval_g(q)?;
    let denom = companion(q) + 0.5 * nz.k * to_go * g;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "closed-form extremal is singular at s = {} (E = {})",
            sigma * scale,
            nz.r / (scale * scale)
        )));
    }
    let xn = 1.0 / (denom * denom);
    let yn = -to_go * g / denom;
    // λ₁x + λ₂y is conserved and equals k at the end point
    let omega_n = nz.k - nz.c * yn;
    let x = end.x() * xn;
    let omega = omega_n / scale;
    Ok(TrajectorySample {
        s: sigma * scale,
        t: start.t() - sigma * scale,
        x,
        y: end.y() + end.x() * scale * yn,
        lambda1: omega / x,
        lambda2: nz.c / (scale * scale * end.x()),
        omega,
    })
}

/// The optimal trajectory from `start` to `end` evaluated by the closed form
/// at path parameter `s ∈ [0, t − t₀]`, without endpoint pinning.
pub fn trajectory_at(start: &GPoint, end: &GPoint, s: f64) -> Result<TrajectorySample> {
    let nz = normalized(start, end)?;
    let horizon = nz.red.horizon;
    if !(0.0..=horizon).contains(&s) {
        return Err(Error::Domain(format!("s = {s} outside [0, {horizon}]")));
    }
    sample(&nz, start, end, 2.0 * s / horizon)
}

/// `n ≥ 2` uniformly spaced samples of the optimal trajectory from `start`
/// (sample 0) to `end` (sample `n−1`). The end samples are pinned to the data.
pub fn trajectory(start: &GPoint, end: &GPoint, n: usize) -> Result<Vec<TrajectorySample>> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    let nz = normalized(start, end)?;
    let mut out = (0..n)
        .map(|i| sample(&nz, start, end, 2.0 * i as f64 / (n - 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    // remove the round-off of the closed form at the ends
    if let Some(first) = out.first_mut() {
        first.x = start.x();
        first.y = start.y();
    }
    if let Some(last) = out.last_mut() {
        last.x = end.x();
        last.y = end.y();
        last.t = end.t();
    }
    Ok(out)
}

/// Left Riemann sum `Σ ω² Δs` over consecutive samples.
pub fn discrete_cost(samples: &[TrajectorySample]) -> f64 {
    samples
        .windows(2)
        .map(|w| w[0].omega * w[0].omega * (w[1].s - w[0].s))
        .sum()
}

/// `4/(t−t₀) · log²(v) + 4(x₀+x)/(y₀−y)`, the large-`v` asymptote of `Ψ`.
pub fn psi_asymptotic_log(start: &GPoint, end: &GPoint) -> Result<f64> {
    let red = reduce(start, end)?;
    let l = red.ratio.ln();
    Ok(4.0 / red.horizon * l * l + 4.0 * (start.x() + end.x()) / (end.y() - start.y()))
}

/// `4(√x+√x₀)²/(y₀−y) − 4π²/(t−t₀)`, the small-`v` asymptote of `Ψ`.
pub fn psi_asymptotic_small(start: &GPoint, end: &GPoint) -> Result<f64> {
    let red = reduce(start, end)?;
    let s = start.x().sqrt() + end.x().sqrt();
    Ok(4.0 * s * s / (end.y() - start.y()) - 4.0 * PI2 / red.horizon)
}

/// The reduced ratio `(y₀−y)/((t−t₀)√(x x₀))` that drives both asymptotic regimes.
pub fn ratio_parameter(start: &GPoint, end: &GPoint) -> Result<f64> {
    Ok(reduce(start, end)?.ratio)
}

/// Central-difference residual of `YΨ + ¼(XΨ)²` for `z ↦ Ψ(pole; z)`, where
/// `X = x∂ₓ` and `Y = x∂_y − ∂_t` act on the end point `z`.
///
/// Requires `z` strictly inside the attainable set of `pole` with a margin
/// of at least `2h` (`y > y_pole`, `t < t_pole`).
pub fn hjb_residual(pole: &GPoint, z: &GPoint, h: f64) -> Result<f64> {
    let d = hjb_terms(pole, z, h)?;
    Ok(d.y_psi + 0.25 * d.x_psi * d.x_psi)
}

/// The finite-difference derivatives behind [`hjb_residual`].
#[derive(Debug, Clone, Copy)]
pub struct HjbTerms {
    pub psi: f64,
    pub x_psi: f64,
    pub y_psi: f64,
}

pub fn hjb_terms(pole: &GPoint, z: &GPoint, h: f64) -> Result<HjbTerms> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    if !(z.y() - 2.0 * h > pole.y()) || !(z.t() + 2.0 * h < pole.t()) || !(z.x() - 2.0 * h > 0.0) {
        return Err(Error::Domain(format!(
            "{z} is within 2h of the boundary of the attainable set of {pole}"
        )));
    }
    let f = |x: f64, y: f64, t: f64| -> Result<f64> {
        psi(pole, &GPoint::new(x, y, t)?)?
            .finite()
            .ok_or(Error::NoAdmissiblePath)
    };
    let (x, y, t) = z.as_tuple();
    let dx = (f(x + h, y, t)? - f(x - h, y, t)?) / (2.0 * h);
    let dy = (f(x, y + h, t)? - f(x, y - h, t)?) / (2.0 * h);
    let dt = (f(x, y, t + h)? - f(x, y, t - h)?) / (2.0 * h);
    Ok(HjbTerms {
        psi: f(x, y, t)?,
        x_psi: x * dx,
        y_psi: x * dy - dt,
    })
}

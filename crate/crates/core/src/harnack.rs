//! Admissible paths and Harnack chains along them.
//!
//! A path leaves `z₀ = (x₀, y₀, t₀)` backwards in time, `ẋ = ωx`, `ẏ = x`,
//! `ṫ = −1`. The chain times follow
//!
//! ```text
//! t_{j+1} = max{ t, t_j − θ²/4, t_j − θ²(t_j − T₀), inf{s : ∫_s^{t_j} ω² ≤ h} }
//! ```
//!
//! with `h = 4 log²(3/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{in_paraboloid, GPoint};

/// `4 log²(3/2)`.
pub fn harnack_h() -> f64 {
    let l = 1.5f64.ln();
    4.0 * l * l
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub theta: f64,
    /// Harnack constant `M > 1`.
    pub m: f64,
    /// Lower time boundary `T₀`.
    pub t_boundary: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            theta: 0.5,
            m: 10.0,
            t_boundary: -1.0,
        }
    }
}

impl ChainConfig {
    pub fn new(theta: f64, m: f64, t_boundary: f64) -> Result<Self> {
        let c = ChainConfig {
            theta,
            m,
            t_boundary,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config(format!(
                "theta must lie in (0,1), got {}",
                self.theta
            )));
        }
        if !(self.m > 1.0) || !self.m.is_finite() {
            return Err(Error::Config(format!("M must exceed 1, got {}", self.m)));
        }
        if !self.t_boundary.is_finite() {
            return Err(Error::Config("T0 must be finite".into()));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        harnack_h()
    }

    /// `β = log M / |log(1 − θ²)|`.
    pub fn beta(&self) -> f64 {
        self.m.ln() / (1.0 - self.theta * self.theta).ln().abs()
    }
}

/// A control on `[0, duration]` in the path parameter `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Control {
    Zero {
        duration: f64,
    },
    Constant {
        value: f64,
        duration: f64,
    },
    /// Values on `n` equal pieces.
    PiecewiseConstant {
        values: Vec<f64>,
        duration: f64,
    },
    /// Values at `n ≥ 2` equally spaced nodes, linearly interpolated.
    Sampled {
        values: Vec<f64>,
        duration: f64,
    },
}

impl Control {
    pub fn duration(&self) -> f64 {
        match self {
            Control::Zero { duration }
            | Control::Constant { duration, .. }
            | Control::PiecewiseConstant { duration, .. }
            | Control::Sampled { duration, .. } => *duration,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.duration();
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain(format!(
                "control duration must be positive, got {d}"
            )));
        }
        match self {
            Control::PiecewiseConstant { values, .. } if values.is_empty() => Err(Error::Domain(
                "piecewise-constant control needs at least one piece".into(),
            )),
            Control::Sampled { values, .. } if values.len() < 2 => Err(Error::Domain(
                "sampled control needs at least two nodes".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Control::Zero { .. } => true,
            Control::Constant { value, .. } => *value == 0.0,
            Control::PiecewiseConstant { values, .. } | Control::Sampled { values, .. } => {
                values.iter().all(|v| *v == 0.0)
            }
        }
    }

    /// `ω(s)`, clamped to the control interval.
    pub fn value(&self, s: f64) -> f64 {
        let d = self.duration();
        let s = s.clamp(0.0, d);
        match self {
            Control::Zero { .. } => 0.0,
            Control::Constant { value, .. } => *value,
            Control::PiecewiseConstant { values, .. } => {
                let n = values.len();
                let i = ((s / d * n as f64) as usize).min(n - 1);
                values[i]
            }
            Control::Sampled { values, .. } => {
                let n = values.len() - 1;
                let u = s / d * n as f64;
                let i = (u as usize).min(n - 1);
                let f = u - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }

    /// `∫₀^s ω²`, exact for every variant.
    pub fn energy_to(&self, s: f64) -> f64 {
        let d = self.duration();
        let s = s.clamp(0.0, d);
        match self {
            Control::Zero { .. } => 0.0,
            Control::Constant { value, .. } => value * value * s,
            Control::PiecewiseConstant { values, .. } => {
                let n = values.len();
                let w = d / n as f64;
                let mut acc = 0.0;
                for (i, v) in values.iter().enumerate() {
                    let lo = i as f64 * w;
                    if lo >= s {
                        break;
                    }
                    acc += v * v * ((lo + w).min(s) - lo);
                }
                acc
            }
            Control::Sampled { values, .. } => {
                let n = values.len() - 1;
                let w = d / n as f64;
                let mut acc = 0.0;
                for (i, &a) in values.iter().take(n).enumerate() {
                    let lo = i as f64 * w;
                    if lo >= s {
                        break;
                    }
                    let hi = (lo + w).min(s);
                    let b = self.value(hi);
                    acc += (a * a + a * b + b * b) / 3.0 * (hi - lo);
                }
                acc
            }
        }
    }

    /// `Φ(ω) = ∫ ω²` over the whole interval.
    pub fn total_energy(&self) -> f64 {
        self.energy_to(self.duration())
    }
}

/// A point of an integrated path together with its parameter `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub s: f64,
    pub point: GPoint,
}

/// Integrate `ẋ = ωx`, `ẏ = x`, `ṫ = −1` from `start` over the control's
/// interval with `steps` uniform steps: `x` is updated by the exponential of
/// the trapezoid `∫ω`, `y` by the trapezoid rule.
pub fn integrate_admissible_path(
    start: &GPoint,
    omega: &Control,
    steps: usize,
) -> Result<Vec<PathPoint>> {
    omega.validate()?;
    if steps == 0 {
        return Err(Error::Domain("need at least one step".into()));
    }
    let d = omega.duration();
    let ds = d / steps as f64;
    let (mut x, mut y) = (start.x(), start.y());
    let mut out = Vec::with_capacity(steps + 1);
    out.push(PathPoint {
        s: 0.0,
        point: *start,
    });
    for j in 0..steps {
        let (s0, s1) = (
            j as f64 * ds,
            if j + 1 == steps {
                d
            } else {
                (j + 1) as f64 * ds
            },
        );
        let int_w = 0.5 * (omega.value(s0) + omega.value(s1)) * (s1 - s0);
        let x1 = x * int_w.exp();
        y += 0.5 * (x + x1) * (s1 - s0);
        x = x1;
        out.push(PathPoint {
            s: s1,
            point: GPoint::new(x, y, start.t() - s1)?,
        });
    }
    Ok(out)
}

fn check_order(t: f64, t0: f64, cfg: &ChainConfig) -> Result<()> {
    cfg.validate()?;
    if !(cfg.t_boundary < t && t < t0) {
        return Err(Error::Domain(format!(
            "need T0 < t < t0, got T0={}, t={t}, t0={t0}",
            cfg.t_boundary
        )));
    }
    Ok(())
}

/// Chain times from `t0` down to `t`; `omega` is parametrized by
/// `s = t0 − time`.
pub fn chain_times(t: f64, t0: f64, cfg: &ChainConfig, omega: &Control) -> Result<Vec<f64>> {
    check_order(t, t0, cfg)?;
    omega.validate()?;
    let th2 = cfg.theta * cfg.theta;
    let h = cfg.h();
    let budget_active = !omega.is_zero();
    let mut times = vec![t0];
    let mut tj = t0;
    // each step is at least min(θ²/4, θ²(t − T₀)) or consumes h of energy
    let max_steps = 10_000_000usize;
    while tj > t {
        let mut next = t.max(tj - th2 / 4.0).max(tj - th2 * (tj - cfg.t_boundary));
        if budget_active {
            next = next.max(budget_time(tj, t0, h, omega));
        }
        if !(next < tj) {
            return Err(Error::Domain(format!("chain stalled at t = {tj}")));
        }
        times.push(next);
        tj = next;
        if times.len() > max_steps {
            return Err(Error::Domain("chain did not terminate".into()));
        }
    }
    Ok(times)
}

/// `inf{τ : ∫_τ^{t_j} ω² ≤ h}` in time units, or `−∞` when the remaining
/// budget never binds.
fn budget_time(tj: f64, t0: f64, h: f64, omega: &Control) -> f64 {
    let d = omega.duration();
    let sj = t0 - tj;
    let base = omega.energy_to(sj);
    if omega.energy_to(d) - base <= h {
        return f64::NEG_INFINITY;
    }
    // bisection on the monotone cumulative energy
    let (mut lo, mut hi) = (sj, d);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if omega.energy_to(mid) - base <= h {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    t0 - lo
}

/// `Φ/h + 4(t₀−t)/θ² + |log((t−T₀)/(t₀−T₀))|/|log(1−θ²)| + 1`.
pub fn chain_length_bound(phi: f64, t: f64, t0: f64, cfg: &ChainConfig) -> f64 {
    let th2 = cfg.theta * cfg.theta;
    phi / cfg.h()
        + 4.0 * (t0 - t) / th2
        + ((t - cfg.t_boundary) / (t0 - cfg.t_boundary)).ln().abs() / (1.0 - th2).ln().abs()
        + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainPoints {
    pub points: Vec<GPoint>,
    /// `in_paraboloid[j]`: point `j+1` lies in `P_{r_j}` of point `j`.
    pub in_paraboloid: Vec<bool>,
}

impl ChainPoints {
    pub fn verified(&self) -> bool {
        self.in_paraboloid.iter().all(|b| *b)
    }
}

/// Interpolate `path` at the chain times and check each consecutive
/// paraboloid inclusion with `r_j = √(t_j − t_{j+1})/θ`.
pub fn chain_points(path: &[PathPoint], times: &[f64], theta: f64) -> Result<ChainPoints> {
    if path.len() < 2 {
        return Err(Error::Domain("path needs at least two points".into()));
    }
    let t_start = path[0].point.t();
    let t_end = path[path.len() - 1].point.t();
    let mut points = Vec::with_capacity(times.len());
    for &tau in times {
        let tol = 1e-12 * (1.0 + t_start.abs().max(t_end.abs()));
        if tau > t_start + tol || tau < t_end - tol {
            return Err(Error::Domain(format!(
                "time {tau} lies outside the path span [{t_end}, {t_start}]"
            )));
        }
        points.push(interpolate(path, t_start - tau)?);
    }
    let mut flags = Vec::with_capacity(points.len().saturating_sub(1));
    for w in points.windows(2) {
        let dt = w[0].t() - w[1].t();
        let r = dt.max(0.0).sqrt() / theta * (1.0 + 1e-12);
        flags.push(dt > 0.0 && in_paraboloid(&w[1], &w[0], r, theta)?);
    }
    Ok(ChainPoints {
        points,
        in_paraboloid: flags,
    })
}

fn interpolate(path: &[PathPoint], s: f64) -> Result<GPoint> {
    let i = match path.binary_search_by(|p| p.s.total_cmp(&s)) {
        Ok(i) => return Ok(path[i].point),
        Err(i) => i.clamp(1, path.len() - 1),
    };
    let (a, b) = (&path[i - 1], &path[i]);
    let f = ((s - a.s) / (b.s - a.s)).clamp(0.0, 1.0);
    let (pa, pb) = (a.point, b.point);
    // geometric interpolation keeps x positive
    GPoint::new(
        pa.x() * (pb.x() / pa.x()).powf(f),
        pa.y() + f * (pb.y() - pa.y()),
        pa.t() + f * (pb.t() - pa.t()),
    )
}

/// Guaranteed ratio `u(path end) / u(path start)` from a Harnack chain:
/// `((t−T₀)/(t₀−T₀))^β · M^{−1−Φ/h−4(t₀−t)/θ²}`.
pub fn lower_bound_multiplier(phi: f64, t: f64, t0: f64, cfg: &ChainConfig) -> Result<f64> {
    check_order(t, t0, cfg)?;
    if !(phi >= 0.0) {
        return Err(Error::Domain(format!(
            "phi must be non-negative, got {phi}"
        )));
    }
    let ratio = (t - cfg.t_boundary) / (t0 - cfg.t_boundary);
    let th2 = cfg.theta * cfg.theta;
    let exponent = -1.0 - phi / cfg.h() - 4.0 * (t0 - t) / th2;
    Ok(ratio.powf(cfg.beta()) * cfg.m.powf(exponent))
}

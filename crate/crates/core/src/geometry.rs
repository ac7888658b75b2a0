//! The Lie group `(R+ x R^2, ∘)` under which the model operator is
//! left-invariant, its dilations, and the cylinder / paraboloid sets used
//! when building Harnack chains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(x, y, t)` of the group. `x` is always strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPoint {
    x: f64,
    y: f64,
    t: f64,
}

impl GPoint {
    /// The group identity `(1, 0, 0)`.
    pub const IDENTITY: GPoint = GPoint {
        x: 1.0,
        y: 0.0,
        t: 0.0,
    };

    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidPoint(format!(
                "x must be positive and finite, got {x}"
            )));
        }
        if !y.is_finite() || !t.is_finite() {
            return Err(Error::InvalidPoint(format!(
                "non-finite coordinate in ({x}, {y}, {t})"
            )));
        }
        Ok(GPoint { x, y, t })
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn as_tuple(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.t)
    }

    /// `self ∘ other = (x·x', y + x·y', t + t')`.
    pub fn compose(&self, other: &GPoint) -> GPoint {
        GPoint {
            x: self.x * other.x,
            y: self.y + self.x * other.y,
            t: self.t + other.t,
        }
    }

    pub fn inverse(&self) -> GPoint {
        GPoint {
            x: 1.0 / self.x,
            y: -self.y / self.x,
            t: -self.t,
        }
    }

    /// `self⁻¹ ∘ z`, written out directly as `(x/x₀, (y−y₀)/x₀, t−t₀)`.
    pub fn left_translate_to_identity(&self, z: &GPoint) -> GPoint {
        GPoint {
            x: z.x / self.x,
            y: (z.y - self.y) / self.x,
            t: z.t - self.t,
        }
    }

    /// `(x, y, t) ↦ (x, y/r, t/r)`. The value function is homogeneous of
    /// degree one under this map.
    pub fn dilate(&self, r: f64) -> Result<GPoint> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!(
                "dilation factor must be positive, got {r}"
            )));
        }
        Ok(GPoint {
            x: self.x,
            y: self.y / r,
            t: self.t / r,
        })
    }
}

impl std::fmt::Display for GPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.t)
    }
}

pub fn compose(a: &GPoint, b: &GPoint) -> GPoint {
    a.compose(b)
}

pub fn inverse(a: &GPoint) -> GPoint {
    a.inverse()
}

pub fn dilate(a: &GPoint, r: f64) -> Result<GPoint> {
    a.dilate(r)
}

/// Centre and radius of an open cylinder `H_r(z₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    center: GPoint,
    r: f64,
}

impl CylinderSpec {
    pub fn new(center: GPoint, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!(
                "cylinder radius must lie in (0,1), got {r}"
            )));
        }
        Ok(CylinderSpec { center, r })
    }

    pub fn center(&self) -> GPoint {
        self.center
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Membership in `H_r(z₀)`:
/// `|x−x₀| < r x₀`, `−r² < t−t₀ < 0`, `|y−y₀+x₀(t−t₀)| < r³ x₀` (all strict).
pub fn in_cylinder_h(z: &GPoint, spec: &CylinderSpec) -> bool {
    let c = spec.center;
    let r = spec.r;
    let dt = z.t - c.t;
    (z.x - c.x).abs() < r * c.x
        && -r * r < dt
        && dt < 0.0
        && (z.y - c.y + c.x * dt).abs() < r * r * r * c.x
}

/// Membership in the paraboloid `P_r(z₀)` of the Harnack chain construction:
/// `0 < t₀−t ≤ θ²r²`, `|x−x₀| ≤ (t₀−t)^{1/2} x₀`,
/// `|y−y₀−(t₀−t)x₀| ≤ (t₀−t)^{3/2} x₀`.
pub fn in_paraboloid(z: &GPoint, center: &GPoint, r: f64, theta: f64) -> Result<bool> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!(
            "theta must lie in (0,1), got {theta}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    let s = center.t - z.t;
    if !(s > 0.0 && s <= theta * theta * r * r) {
        return Ok(false);
    }
    let x0 = center.x;
    Ok((z.x - x0).abs() <= s.sqrt() * x0 && (z.y - center.y - s * x0).abs() <= s.powf(1.5) * x0)
}

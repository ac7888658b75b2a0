//! Brute-force value-function oracle: shooting on the Pontryagin system.
//!
//! Works in the normalized problem (end point `(1, 0)`, horizon `2`) and
//! integrates the extremal backwards from the end point with RK4:
//!
//! ```text
//! dx/dσ = −λ₁x²,  dy/dσ = −x,  dλ₁/dσ = λ₁²x + c,  dJ/dσ = λ₁²x²
//! ```
//!
//! with `σ = 2 − s`, `(x, y, λ₁) = (1, 0, k)` at `σ = 0`. The extremals are
//! parametrized by `(k, E)` with `c = (E − k²)/2`; a coarse scan seeds damped
//! Newton iterations and the cheapest converged extremal wins.

#![allow(dead_code)]

pub struct Shot {
    pub x: f64,
    pub y: f64,
    pub cost: f64,
}

pub fn shoot(k: f64, e: f64, steps: usize) -> Option<Shot> {
    let c = 0.5 * (e - k * k);
    let h = 2.0 / steps as f64;
    let f = |s: [f64; 4]| -> [f64; 4] {
        let (x, l) = (s[0], s[2]);
        [-l * x * x, -x, l * l * x + c, l * l * x * x]
    };
    let mut s = [1.0, 0.0, k, 0.0];
    for _ in 0..steps {
        let k1 = f(s);
        let k2 = f(add(s, k1, 0.5 * h));
        let k3 = f(add(s, k2, 0.5 * h));
        let k4 = f(add(s, k3, h));
        for i in 0..4 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !(s[0] > 0.0) || !s.iter().all(|v| v.is_finite()) || s[0] > 1e8 {
            return None;
        }
    }
    Some(Shot {
        x: s[0],
        y: s[1],
        cost: s[3],
    })
}

fn add(s: [f64; 4], d: [f64; 4], h: f64) -> [f64; 4] {
    [
        s[0] + h * d[0],
        s[1] + h * d[1],
        s[2] + h * d[2],
        s[3] + h * d[3],
    ]
}

fn residual(k: f64, e: f64, x1: f64, y1: f64, steps: usize) -> Option<([f64; 2], f64)> {
    let s = shoot(k, e, steps)?;
    Some(([s.x.ln() - x1.ln(), s.y - y1], s.cost))
}

fn newton(mut k: f64, mut e: f64, x1: f64, y1: f64, steps: usize) -> Option<f64> {
    let scale = 1.0 + y1.abs();
    for _ in 0..60 {
        let (r, cost) = residual(k, e, x1, y1, steps)?;
        let norm = r[0].abs() + r[1].abs() / scale;
        if norm < 1e-11 {
            return Some(cost);
        }
        let dk = 1e-6 * (1.0 + k.abs());
        let de = 1e-6 * (1.0 + e.abs());
        let (rk, _) = residual(k + dk, e, x1, y1, steps)?;
        let (re, _) = residual(k, e + de, x1, y1, steps)?;
        let j = [
            [(rk[0] - r[0]) / dk, (re[0] - r[0]) / de],
            [(rk[1] - r[1]) / dk, (re[1] - r[1]) / de],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let sk = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let se = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        // backtrack until the residual decreases
        let mut lambda = 1.0;
        loop {
            let (nk, ne) = (k - lambda * sk, e - lambda * se);
            if let Some((nr, _)) = residual(nk, ne, x1, y1, steps) {
                if nr[0].abs() + nr[1].abs() / scale < norm {
                    k = nk;
                    e = ne;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return None;
            }
        }
    }
    None
}

/// Minimum extremal cost from `(x1, y1)` to `(1, 0)` over horizon 2.
pub fn normalized_value(x1: f64, y1: f64, steps: usize) -> Option<f64> {
    let pi2 = std::f64::consts::PI.powi(2);
    let mut seeds: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..=40 {
        let k = -25.0 + 50.0 * i as f64 / 40.0;
        for j in 0..=40 {
            let e = -pi2 + 0.02 + (30.0 + pi2) * j as f64 / 40.0;
            if let Some((r, _)) = residual(k, e, x1, y1, 200) {
                seeds.push((r[0].abs() + r[1].abs() / (1.0 + y1.abs()), k, e));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    seeds
        .iter()
        .take(8)
        .filter_map(|&(_, k, e)| newton(k, e, x1, y1, steps))
        .min_by(|a, b| a.partial_cmp(b).unwrap())
}

/// `Ψ((x, y, t); (x₀, y₀, t₀))` through translation and dilation to the
/// normalized problem.
pub fn oracle_psi(start: (f64, f64, f64), end: (f64, f64, f64), steps: usize) -> Option<f64> {
    let (x, y, t) = start;
    let (x0, y0, t0) = end;
    let horizon = t - t0;
    let x1 = x / x0;
    let y1 = 2.0 * (y - y0) / (x0 * horizon);
    normalized_value(x1, y1, steps).map(|v| v * 2.0 / horizon)
}

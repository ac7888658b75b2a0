use geyor_core::kernels::{
    gamma0, gamma_mu, kolmo_kernel, kolmo_kernel_mu, pde_residual_kolmo, pde_residual_l0,
    pde_residual_lmu, yor_density, yor_psi, yor_psi_terms, QuadratureConfig,
};
use geyor_core::quadrature::{gl_breakpoints, gl_panels};
use geyor_core::GPoint;
use proptest::prelude::*;
use rayon::prelude::*;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn p(x: f64, y: f64, t: f64) -> GPoint {
    GPoint::new(x, y, t).unwrap()
}

/// Composite Simpson with `n` (even) intervals.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn yor_psi_matches_simpson_reference() {
    for &(z, t) in &[(1.0, 1.0), (0.3, 0.7), (2.5, 2.0)] {
        let f = |xi: f64| {
            (-xi * xi / (2.0 * t) - z * xi.cosh()).exp()
                * xi.sinh()
                * (std::f64::consts::PI * xi / t).sin()
        };
        let reference = simpson(f, 0.0, 14.0, 1_000_000);
        let v = yor_psi(z, t, &cfg()).unwrap();
        assert!(
            (v.value - reference).abs() <= 1e-8 * reference.abs(),
            "z={z} t={t}: {} vs {reference} (err {})",
            v.value,
            v.est_error
        );
        assert!(v.est_error <= 1e-8 * reference.abs());
    }
}

#[test]
fn half_periods_alternate_past_the_peak() {
    for &(z, t) in &[(1.0, 1.0), (0.2, 0.5), (0.05, 0.3)] {
        let terms = yor_psi_terms(z, t, &cfg()).unwrap().terms;
        let peak = terms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0;
        for w in terms[peak..].windows(2) {
            assert!(
                w[0] * w[1] < 0.0 || w[1] == 0.0,
                "no alternation at z={z}, t={t}"
            );
            assert!(w[1].abs() < w[0].abs());
        }
    }
}

#[test]
fn density_non_negative_on_grid() {
    for i in 0..=24 {
        let w = -3.0 + 0.25 * i as f64;
        for j in 1..=30 {
            let y = 0.1 * j as f64 * j as f64 / 3.0;
            let d = yor_density(w, y, 1.0, &cfg()).unwrap();
            assert!(d.value >= 0.0);
        }
    }
}

fn y_rule() -> (Vec<f64>, Vec<f64>) {
    gl_breakpoints(
        &[0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 30.0, 50.0],
        3,
        12,
    )
}

fn density_mass(t: f64, w_range: (f64, f64)) -> f64 {
    let (ws, ww) = gl_panels(w_range.0, w_range.1, 24, 12);
    let (ys, yw) = y_rule();
    ws.par_iter()
        .zip(&ww)
        .map(|(&w, &wwt)| {
            ys.iter()
                .zip(&yw)
                .map(|(&y, &ywt)| ywt * yor_density(w, y, t, &cfg()).unwrap().value)
                .sum::<f64>()
                * wwt
        })
        .sum()
}

#[test]
fn yor_density_mass_on_window() {
    let m = density_mass(1.0, (-6.0, 6.0));
    assert!((m - 1.0).abs() < 1e-2, "mass {m}");
}

#[test]
fn gamma0_mass_over_pole_variables() {
    // Γ₀ dξ dη = p dw da with ξ = x e^{2w}, η = y + 2x a
    for t in [0.5, 1.0, 2.0] {
        let m = density_mass(t / 2.0, (-8.0, 8.0));
        assert!((m - 1.0).abs() < 1e-2, "t={t}: mass {m}");
    }
}

#[test]
fn gamma0_mass_direct_in_pole_coordinates() {
    // the same mass, integrating Γ₀ itself on a (log ξ, η) grid
    let z = p(1.0, 0.0, 1.0);
    let (ls, lw) = gl_panels(-6.0, 6.0, 24, 12);
    let (es, ew) = gl_breakpoints(
        &[0.0, 0.1, 0.4, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0],
        3,
        12,
    );
    let m: f64 = ls
        .par_iter()
        .zip(&lw)
        .map(|(&l, &lwt)| {
            let xi = l.exp();
            es.iter()
                .zip(&ew)
                .map(|(&eta, &ewt)| ewt * gamma0(&z, &p(xi, eta, 0.0), &cfg()).unwrap().value)
                .sum::<f64>()
                * lwt
                * xi
        })
        .sum();
    assert!((m - 1.0).abs() < 1e-2, "mass {m}");
}

#[test]
fn chapman_kolmogorov() {
    let z = p(1.0, 0.0, 2.0);
    for &(x0, y0) in &[(1.0, 4.0), (2.0, 5.0), (0.5, 2.5)] {
        let pole = p(x0, y0, 0.0);
        let direct = gamma0(&z, &pole, &cfg()).unwrap().value;
        // intermediate point (ξ, η, 1) = (e^{2w}, 2a, 1)
        let (ws, ww) = gl_panels(-3.5, 3.5, 28, 10);
        let (as_, aw) = gl_panels(0.0, y0 / 2.0, 40, 10);
        let composed: f64 = ws
            .par_iter()
            .zip(&ww)
            .map(|(&w, &wwt)| {
                let xi = (2.0 * w).exp();
                as_.iter()
                    .zip(&aw)
                    .map(|(&a, &awt)| {
                        let first = yor_density(w, a, 0.5, &cfg()).unwrap().value;
                        if first == 0.0 {
                            return 0.0;
                        }
                        awt * first * gamma0(&p(xi, 2.0 * a, 1.0), &pole, &cfg()).unwrap().value
                    })
                    .sum::<f64>()
                    * wwt
            })
            .sum();
        let rel = (composed - direct).abs() / direct;
        assert!(rel < 2e-2, "pole ({x0},{y0}): {composed} vs {direct}");
    }
}

#[test]
fn gamma0_is_positive_on_support() {
    for &(x, y, t) in &[(0.5, -0.2, 0.6), (3.0, -2.0, 1.5), (1.0, -10.0, 4.0)] {
        assert!(
            gamma0(&p(x, y, t), &GPoint::IDENTITY, &cfg())
                .unwrap()
                .value
                > 0.0
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gamma0_translation_covariance(
        x in 0.3f64..3.0, dy in 0.2f64..4.0, dt in 0.6f64..3.0,
        x0 in 0.3f64..3.0, y0 in -2.0f64..2.0, t0 in -2.0f64..2.0,
    ) {
        let pole = p(x0, y0, t0);
        let z = p(x, y0 - dy, t0 + dt);
        let lhs = x0 * x0 * gamma0(&z, &pole, &cfg()).unwrap().value;
        let rhs = gamma0(&pole.left_translate_to_identity(&z), &GPoint::IDENTITY, &cfg()).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs() + 1e-300);
    }
}

#[test]
fn kolmo_normalization() {
    for &(x, y, s, mu) in &[
        (0.0f64, 0.0f64, 1.0f64, 1.0f64),
        (0.7, -0.3, 0.4, 1.0),
        (-1.2, 2.0, 2.5, 0.6),
    ] {
        let sd_x = (2.0 * mu * s).sqrt();
        let (xs, xw) = gl_panels(x - 12.0 * sd_x - s * 2.0, x + 12.0 * sd_x + s * 2.0, 40, 16);
        let sd_b = (mu * s * s * s / 6.0).sqrt();
        let total: f64 = xs
            .iter()
            .zip(&xw)
            .map(|(&xi, &wx)| {
                let centre = y + 0.5 * s * (x + xi);
                let (es, ew) = gl_panels(centre - 14.0 * sd_b, centre + 14.0 * sd_b, 20, 16);
                es.iter()
                    .zip(&ew)
                    .map(|(&eta, &we)| {
                        we * kolmo_kernel_mu(mu, &[x], &[y], s, &[xi], &[eta], 0.0).unwrap()
                    })
                    .sum::<f64>()
                    * wx
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-8, "mass {total}");
        if mu == 1.0 {
            assert_eq!(
                kolmo_kernel([x, y, s], [0.3, 0.1, 0.0]),
                kolmo_kernel_mu(1.0, &[x], &[y], s, &[0.3], &[0.1], 0.0).unwrap()
            );
        }
    }
}

#[test]
fn l0_residual_example() {
    let r = pde_residual_l0(&p(1.2, -0.5, 1.0), &GPoint::IDENTITY, 1e-3, &cfg()).unwrap();
    assert!(r.residual.abs() <= 1e-2 * r.scale.max(1.0), "{r:?}");
}

fn richardson<F: Fn(f64) -> f64>(f: F, h: f64) -> (f64, f64) {
    let (a, b, c) = (f(h), f(h / 2.0), f(h / 4.0));
    (a / b, b / c)
}

#[test]
fn l0_residual_second_order() {
    for &(x, y, t) in &[(1.2, -0.5, 1.0), (0.8, -1.5, 1.6), (1.5, -2.0, 2.5)] {
        let z = p(x, y, t);
        let (r1, r2) = richardson(
            |h| {
                pde_residual_l0(&z, &GPoint::IDENTITY, h, &cfg())
                    .unwrap()
                    .residual
            },
            0.04,
        );
        assert!(
            (3.5..4.5).contains(&r1) && (3.5..4.5).contains(&r2),
            "{z}: ratios {r1} {r2}"
        );
    }
}

#[test]
fn lmu_residual_second_order() {
    for &(mu, x, y, t) in &[
        (0.5, 1.1, -1.0, 2.0),
        (2.0, 0.9, -0.8, 0.8),
        (1.5, 1.3, -1.2, 1.2),
    ] {
        let z = p(x, y, t);
        let (r1, r2) = richardson(
            |h| {
                pde_residual_lmu(mu, &z, &GPoint::IDENTITY, h, &cfg())
                    .unwrap()
                    .residual
            },
            0.04,
        );
        assert!(
            (3.5..4.5).contains(&r1) && (3.5..4.5).contains(&r2),
            "mu={mu} {z}: ratios {r1} {r2}"
        );
    }
}

#[test]
fn gamma_mu_other_operators_fail_the_residual() {
    // Γ₀ is not a solution of L^μ for μ ≠ 1: the residual of the wrong
    // pairing stays O(1) instead of vanishing
    let z = p(1.1, -1.0, 2.0);
    let cfg = cfg();
    let h = 1e-2;
    let good = pde_residual_lmu(0.5, &z, &GPoint::IDENTITY, h, &cfg).unwrap();
    let g = |a: f64, b: f64, c: f64| gamma0(&p(a, b, c), &GPoint::IDENTITY, &cfg).unwrap().value;
    let (x, y, t) = z.as_tuple();
    let fxx = (g(x + h, y, t) - 2.0 * g(x, y, t) + g(x - h, y, t)) / (h * h);
    let fx = (g(x + h, y, t) - g(x - h, y, t)) / (2.0 * h);
    let fy = (g(x, y + h, t) - g(x, y - h, t)) / (2.0 * h);
    let ft = (g(x, y, t + h) - g(x, y, t - h)) / (2.0 * h);
    let wrong = 0.5 * x * x * fxx + x * fx + x * fy - ft;
    assert!(wrong.abs() > 100.0 * good.residual.abs());
    assert!(gamma_mu(0.5, &z, &GPoint::IDENTITY, &cfg).unwrap().value > 0.0);
}

#[test]
fn kolmo_residual_second_order() {
    for &(x, y, t) in &[(0.3, -0.2, 0.7), (-0.5, 0.4, 1.2), (1.0, -0.2, 0.5)] {
        let r = pde_residual_kolmo([x, y, t], [0.1, 0.0, 0.0], 1e-3).unwrap();
        assert!(r.residual.abs() <= 1e-4 * r.scale.max(1.0));
        let (r1, r2) = richardson(
            |h| {
                pde_residual_kolmo([x, y, t], [0.1, 0.0, 0.0], h)
                    .unwrap()
                    .residual
            },
            0.02,
        );
        assert!(
            (3.5..4.5).contains(&r1) && (3.5..4.5).contains(&r2),
            "ratios {r1} {r2}"
        );
    }
}

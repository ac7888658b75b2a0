#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use common::shooting::oracle_psi;
use geyor_core::value::{psi, synthesize};
use geyor_core::{Branch, GPoint};

fn closed(x: f64, y: f64, t: f64) -> f64 {
    psi(&GPoint::new(x, y, t).unwrap(), &GPoint::IDENTITY)
        .unwrap()
        .finite()
        .unwrap()
}

#[test]
fn second_branch_example_matches_shooting() {
    let o = oracle_psi((4.0, -2.0, 2.0), (1.0, 0.0, 0.0), 2000).unwrap();
    assert!((o - 5.36638).abs() < 1e-4, "oracle {o}");
    assert!((closed(4.0, -2.0, 2.0) - o).abs() < 1e-7 * o);
}

#[test]
fn reference_points_match_shooting() {
    for &(x, y, t) in &[
        (2.0, -1.0, 1.0),
        (1.0, -3.0, 1.0),
        (0.25, -4.0, 0.5),
        (3.0, -0.3, 1.7),
    ] {
        let o = oracle_psi((x, y, t), (1.0, 0.0, 0.0), 2000).unwrap();
        let c = closed(x, y, t);
        assert!(
            (c - o).abs() <= 1e-6 * o.max(1e-3),
            "({x},{y},{t}): closed {c} vs oracle {o}"
        );
    }
}

#[test]
fn branch_threshold_uses_squared_horizon() {
    // E T² ∈ (−4π², −π²) must be second branch whatever T is
    for &t in &[0.5, 1.0, 3.0] {
        let s = synthesize(&GPoint::new(4.0, -t, t).unwrap(), &GPoint::IDENTITY).unwrap();
        let et2 = s.energy * t * t;
        let expect = if et2 >= -std::f64::consts::PI.powi(2) {
            Branch::First
        } else {
            Branch::Second
        };
        assert_eq!(s.branch, expect);
        let o = oracle_psi((4.0, -t, t), (1.0, 0.0, 0.0), 2000).unwrap();
        assert!((s.cost - o).abs() <= 1e-6 * o);
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[test]
fn grid_matches_shooting() {
    let mut worst: f64 = 0.0;
    for &x in &linspace(0.25, 4.0, 5) {
        for &y in &linspace(-4.0, -0.25, 5) {
            for &t in &linspace(0.5, 2.0, 5) {
                let o = oracle_psi((x, y, t), (1.0, 0.0, 0.0), 400).expect("shooting failed");
                let c = closed(x, y, t);
                worst = worst.max((c - o).abs() / o.max(1e-12));
            }
        }
    }
    assert!(worst < 1e-3, "worst relative gap {worst}");
}

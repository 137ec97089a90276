//! Shared model builders and independent oracles for the integration tests.
#![allow(dead_code)]

use inattention::beliefs::{Belief, Halfspace};
use inattention::costs::{make_cost, CostModel, CostSpec, PwqCell, PwqParams};
use inattention::menus::{Act, Menu};
use rand::Rng;

pub const A: [f64; 2] = [-1.3125, 1.1875];
pub const B: [f64; 2] = [1.1875, -1.3125];
pub const Z: [f64; 2] = [0.0, 0.0];

pub fn b(p: f64) -> Belief {
    Belief::binary(p).unwrap()
}

pub fn kinked() -> CostModel {
    make_cost(&CostSpec::kinked_abs_quad(1.0, 1.0, None), &b(0.5)).unwrap()
}

pub fn menu(acts: &[[f64; 2]]) -> Menu {
    Menu::new(
        acts.iter()
            .enumerate()
            .map(|(i, u)| Act::new(format!("a{i}"), u.to_vec()))
            .collect(),
    )
    .unwrap()
}

pub fn menu_n(acts: &[Vec<f64>]) -> Menu {
    Menu::new(
        acts.iter()
            .enumerate()
            .map(|(i, u)| Act::new(format!("a{i}"), u.clone()))
            .collect(),
    )
    .unwrap()
}

/// `|x₂ - ½| + ‖x - x₀‖²` on three states with prior (¼, ¼, ½).
pub fn ridge_spec() -> CostSpec {
    let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let cell = |linear: Vec<f64>, constant: f64, normal: Vec<f64>, offset: f64| PwqCell {
        quad: Some(eye.clone()),
        linear: Some(linear),
        constant,
        constraints: vec![Halfspace { normal, offset }],
    };
    CostSpec::custom_pwq(&PwqParams {
        cells: vec![
            cell(vec![-0.5, -2.0], 0.8125, vec![0.0, 1.0], 0.5),
            cell(vec![-0.5, 0.0], -0.1875, vec![0.0, -1.0], -0.5),
        ],
        kinks: vec![vec![0.4, 0.1, 0.5], vec![0.1, 0.4, 0.5]],
        domain: vec![],
    })
}

/// The built-in two-state models with their names.
pub fn builtins_two_state() -> Vec<(&'static str, CostModel)> {
    vec![
        ("entropy", make_cost(&CostSpec::entropy(), &b(0.5)).unwrap()),
        (
            "quadratic",
            make_cost(&CostSpec::quadratic(1.0), &b(0.5)).unwrap(),
        ),
        ("kinked_abs_quad", kinked()),
        (
            "kinked_abs_quad(prior 0.3)",
            make_cost(&CostSpec::kinked_abs_quad(1.0, 1.0, Some(0.5)), &b(0.3)).unwrap(),
        ),
    ]
}

/// A belief with every coordinate at least `floor`.
pub fn interior_belief<R: Rng>(rng: &mut R, n: usize, floor: f64) -> Belief {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
    let s: f64 = raw.iter().sum();
    let w: Vec<f64> = raw
        .iter()
        .map(|v| floor + (1.0 - n as f64 * floor) * v / s)
        .collect();
    let s: f64 = w.iter().sum();
    Belief::new(w.iter().map(|v| v / s).collect()).unwrap()
}

/// `max_x φ(x) - ψ(x)` concavified at `x₀` for two states, by brute force
/// over every pair of points of a dyadic grid of size `n` plus the prior.
pub fn brute_envelope_1d(acts: &[Vec<f64>], psi: impl Fn(f64) -> f64, x0: f64, n: usize) -> f64 {
    let net = |x: f64| {
        let phi = acts
            .iter()
            .map(|u| u[0] * (1.0 - x) + u[1] * x)
            .fold(f64::NEG_INFINITY, f64::max);
        phi - psi(x)
    };
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut best = net(x0);
    for &xa in xs.iter().filter(|x| **x < x0) {
        for &xb in xs.iter().filter(|x| **x > x0) {
            let w = (x0 - xa) / (xb - xa);
            best = best.max((1.0 - w) * net(xa) + w * net(xb));
        }
    }
    best
}

/// `|x - ½| + (x - ½)²`.
pub fn kinked_psi(x: f64) -> f64 {
    (x - 0.5).abs() + (x - 0.5) * (x - 0.5)
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Concavifier, Primal, SolveReport};
use crate::beliefs::Grid;
use crate::costs::CostModel;
use crate::linalg::{dot, max_abs_diff, norm, sub};
use crate::lp::{LpOutcome, StandardLp};
use crate::menus::Menu;
use crate::{Error, Result, TOL_WIDTH};

pub const DEFAULT_PROBE_SEED: u64 = 0x1A4B_DA5E;
const MAX_CUTS_PER_DIRECTION: usize = 200;
/// How far the exact slope may sit outside the cutting-plane intervals and
/// still replace them (the intervals are outer bounds resolved only to about
/// the square root of the value tolerance near smooth points).
const PIN_SLACK: f64 = 1e-5;
const SUPPORT_WEIGHT: f64 = 1e-9;

/// The set `Λ_F` of slopes of hyperplanes through `(y₀, V(F))` that support
/// the net payoff, summarized by its extent along probe directions.
#[derive(Clone, Debug, Serialize)]
pub struct HyperplaneSet {
    /// Minimizer of the first probe direction.
    pub witness: Vec<f64>,
    /// Intercept of the witness hyperplane `λ·y + level`.
    pub level: f64,
    /// `V(F)` used to build the set.
    pub value: f64,
    pub probe_directions: Vec<Vec<f64>>,
    /// `(min, max)` of `λ·d` over the set for each probe direction.
    pub intervals: Vec<(f64, f64)>,
    /// Minimizing and maximizing slopes for each probe direction.
    pub extremes: Vec<(Vec<f64>, Vec<f64>)>,
    pub widths: Vec<f64>,
    pub max_width: f64,
    /// `max_width ≤ 1e-6`.
    pub singleton: bool,
    /// Cutting planes added beyond the grid.
    pub cuts: usize,
}

/// `2M` signed basis directions followed by eight seeded random unit
/// directions.
pub fn probe_directions(m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * m + 8);
    for a in 0..m {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; m];
            e[a] = s;
            dirs.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < 2 * m + 8 && m > 0 {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nv = norm(&v);
        if nv > 1e-3 && nv <= 1.0 {
            dirs.push(v.iter().map(|x| x / nv).collect());
        }
    }
    dirs
}

pub fn lambda_set(
    model: &CostModel,
    menu: &Menu,
    grid: &Grid,
    report: &SolveReport,
) -> Result<HyperplaneSet> {
    lambda_set_seeded(model, menu, grid, report, DEFAULT_PROBE_SEED)
}

/// Extent of `Λ_F` along each probe direction.
///
/// For a direction `d`, `min {λ·d : λ ∈ Λ}` is the dual of
/// `max Σ w_j (N_j - V)  s.t.  Σ w_j (y_j - y₀) = d, w ≥ 0`
/// (infeasible means unbounded below). Columns are the grid plus cutting
/// planes: at the minimizing `λ` the conjugate oracle finds the most
/// violated support constraint, which is added until none is violated.
pub fn lambda_set_seeded(
    model: &CostModel,
    menu: &Menu,
    grid: &Grid,
    report: &SolveReport,
    seed: u64,
) -> Result<HyperplaneSet> {
    let mut c = Concavifier::new(model, menu, grid)?;
    let mut primal = c.refine(super::SolveOptions::default().max_refine_rounds)?;
    if (primal.value - report.value).abs() > 1e-7 * (1.0 + report.value.abs()) {
        return Err(Error::LinearProgram(format!(
            "report value {} does not match recomputed value {}",
            report.value, primal.value
        )));
    }
    let m = model.dim();
    let dirs = probe_directions(m, seed);
    let start_cols = c.ys.len();
    let mut results: Vec<(f64, Vec<f64>)>;
    // Recompute every direction until the value is stable across a pass.
    let mut passes = 0;
    loop {
        passes += 1;
        let v_before = primal.value;
        let mut cache: Vec<(Vec<f64>, (f64, Vec<f64>))> = Vec::new();
        results = Vec::with_capacity(2 * dirs.len());
        for d in &dirs {
            for sign in [1.0, -1.0] {
                let dd: Vec<f64> = d.iter().map(|x| sign * x).collect();
                if let Some((_, r)) = cache.iter().find(|(e, _)| max_abs_diff(e, &dd) <= 1e-12) {
                    results.push(r.clone());
                    continue;
                }
                let r = min_along(&mut c, &mut primal, &dd)?;
                cache.push((dd, r.clone()));
                results.push(r);
            }
        }
        if primal.value <= v_before + 1e-15 * (1.0 + v_before.abs()) || passes >= 3 {
            break;
        }
    }
    let mut intervals = Vec::with_capacity(dirs.len());
    let mut extremes = Vec::with_capacity(dirs.len());
    let mut widths = Vec::with_capacity(dirs.len());
    for (k, _) in dirs.iter().enumerate() {
        let (lo, lam_lo) = &results[2 * k];
        let (neg_hi, lam_hi) = &results[2 * k + 1];
        let hi = -neg_hi;
        intervals.push((*lo, hi));
        extremes.push((lam_lo.clone(), lam_hi.clone()));
        widths.push(if lo.is_finite() && hi.is_finite() {
            (hi - lo).max(0.0)
        } else {
            f64::INFINITY
        });
    }
    let mut witness = if m == 0 {
        Vec::new()
    } else {
        results[0].1.clone()
    };
    if let Some(exact) = smooth_support_slope(&c, &primal) {
        let consistent = dirs.iter().zip(&intervals).all(|(d, (lo, hi))| {
            let x = dot(&exact, d);
            x >= lo - PIN_SLACK && x <= hi + PIN_SLACK
        });
        if consistent {
            for (k, d) in dirs.iter().enumerate() {
                let x = dot(&exact, d);
                intervals[k] = (x, x);
                extremes[k] = (exact.clone(), exact.clone());
                widths[k] = 0.0;
            }
            witness = exact;
        }
    }
    let max_width = widths.iter().copied().fold(0.0, f64::max);
    let level = primal.value - dot(&witness, &c.y0);
    Ok(HyperplaneSet {
        level,
        value: primal.value,
        witness,
        probe_directions: dirs,
        intervals,
        extremes,
        widths,
        singleton: max_width <= TOL_WIDTH,
        max_width,
        cuts: c.ys.len() - start_cols,
    })
}

/// The unique optimal slope forced by a smooth support point, if there is
/// one.
///
/// Every optimal hyperplane touches the net payoff at each point of an
/// optimal support, so for an act active there, `α - λ ∈ ∂ψ̄(y)`. Where the
/// subdifferential is a single gradient (which rules out the relative
/// boundary, whose subdifferentials carry rays) this pins `λ = α - ∇ψ̄(y)`.
fn smooth_support_slope(c: &Concavifier<'_>, primal: &Primal) -> Option<Vec<f64>> {
    for (j, w) in primal.weights.iter().enumerate() {
        if *w <= SUPPORT_WEIGHT || j >= c.ys.len() {
            continue;
        }
        let Ok(sub_j) = c.model.psi_subdiff(&c.beliefs[j]) else {
            continue;
        };
        if !sub_j.is_singleton() {
            continue;
        }
        let grad = &sub_j.vertices[0];
        let y = &c.ys[j];
        let values: Vec<f64> = c.forms.iter().map(|(a, b)| dot(a, y) + b).collect();
        let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slopes: Vec<Vec<f64>> = c
            .forms
            .iter()
            .zip(&values)
            .filter(|(_, v)| **v >= top - 1e-12 * (1.0 + top.abs()))
            .map(|((a, _), _)| sub(a, grad))
            .collect();
        if slopes
            .windows(2)
            .all(|w| max_abs_diff(&w[0], &w[1]) <= 1e-9)
        {
            return slopes.into_iter().next();
        }
    }
    None
}

/// `min {λ·d : λ ∈ Λ}` and a minimizer; `-∞` (with an empty minimizer) when
/// unbounded below.
fn min_along(c: &mut Concavifier<'_>, primal: &mut Primal, d: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut bump = 0.0;
    for _ in 0..MAX_CUTS_PER_DIRECTION {
        let v = primal.value + bump;
        let mut lp = StandardLp::new(d.len());
        lp.rhs = d.to_vec();
        for (y, net) in c.ys.iter().zip(&c.nets) {
            lp.push_column(sub(y, &c.y0), net - v);
        }
        match lp.maximize() {
            LpOutcome::Infeasible => return Ok((f64::NEG_INFINITY, Vec::new())),
            LpOutcome::Unbounded => {
                // V sits a hair below the LP optimum over the current
                // columns; re-solve and nudge upwards.
                *primal = c.primal()?;
                bump = if bump == 0.0 {
                    1e-15 * (1.0 + primal.value.abs())
                } else {
                    2.0 * bump
                };
                if bump > 1e-9 {
                    return Err(Error::LinearProgram("hyperplane set is empty".into()));
                }
            }
            LpOutcome::Optimal(s) => {
                let lambda = s.duals;
                let (b, viol) = c.price(&lambda, v);
                if viol <= c.tolerance() || !c.push(b) {
                    return Ok((s.objective, lambda));
                }
                let updated = c.primal()?;
                if updated.value > primal.value {
                    *primal = updated;
                }
            }
        }
    }
    Err(Error::LinearProgram(
        "cutting planes did not converge".into(),
    ))
}

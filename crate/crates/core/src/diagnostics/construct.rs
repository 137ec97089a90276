use serde::{Deserialize, Serialize};

use super::axioms::Verdict;
use super::ndisd::NdisdCertificate;
use crate::beliefs::{make_grid, Belief, Grid};
use crate::costs::{make_cost, CostModel, CostSpec};
use crate::linalg::{add, dot, norm, sub};
use crate::menus::{act_from_affine, menu_intersection, menu_phi, menu_union, Act, Menu};
use crate::solver::{solve_menu, HyperplaneSet, SolveReport};
use crate::{Error, Result, TOL_VALUE, TOL_WIDTH};

const H_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 40;

/// Grid resolution used when a diagnostic has to build its own grid.
pub fn default_resolution(dim: usize) -> usize {
    match dim {
        0 | 1 => 257,
        2 => 41,
        3 => 13,
        _ => 7,
    }
}

fn grid_with(model: &CostModel, resolution: usize, knots: &[Belief]) -> Result<Grid> {
    make_grid(model, resolution, knots)
}

/// Largest violation of `λ·(y - y₀) + v ≥ N_F(y)` over the grid.
fn support_violation(
    model: &CostModel,
    menu: &Menu,
    grid: &Grid,
    lambda: &[f64],
    v: f64,
) -> Result<f64> {
    let y0 = model.prior_chart();
    let mut worst = f64::NEG_INFINITY;
    for (p, y) in grid.points().iter().zip(grid.coords()) {
        let net = menu_phi(menu, p).0 - model.psi_value(p)?;
        worst = worst.max(net - dot(lambda, &sub(y, y0)) - v);
    }
    Ok(worst)
}

/// The menu of supporting lines `λᵢ·(p̄ - p̄ᵢ) + ψ̄(p̄ᵢ)`, one act per
/// certificate point.
///
/// Every act lies weakly below `ψ̄`, so the menu is worth nothing, and the
/// certificate's hull weights on its points are an optimal distribution.
/// Both `0` and `-δ` are slopes of optimal hyperplanes; the construction is
/// checked against both on a grid that contains the certificate points.
pub fn build_menu_h(model: &CostModel, cert: &NdisdCertificate) -> Result<Menu> {
    let grid = grid_with(model, default_resolution(model.dim()), &cert.points)?;
    build_menu_h_on(model, cert, &grid)
}

pub fn build_menu_h_on(model: &CostModel, cert: &NdisdCertificate, grid: &Grid) -> Result<Menu> {
    cert.validate(model)?;
    let chart = model.chart();
    let acts = cert
        .points
        .iter()
        .zip(&cert.lambdas)
        .enumerate()
        .map(|(i, (p, lam))| {
            let y = chart.apply(p.as_slice());
            let level = model.psi_value(p)?;
            let mut act = act_from_affine(chart, lam, &y, level);
            act.label = format!("h{}", i + 1);
            Ok(act)
        })
        .collect::<Result<Vec<_>>>()?;
    let h = Menu::new(acts)?;
    let grid = grid.with_knots(model, &cert.points)?;
    let v = solve_menu(model, &h, &grid)?.value;
    if v.abs() > H_TOL {
        return Err(Error::CertificateInvalid(format!("V(H) = {v}, expected 0")));
    }
    let minus_delta: Vec<f64> = cert.delta.iter().map(|d| -d).collect();
    for (name, lam) in [("0", vec![0.0; model.dim()]), ("-delta", minus_delta)] {
        let viol = support_violation(model, &h, &grid, &lam, 0.0)?;
        if viol > H_TOL {
            return Err(Error::CertificateInvalid(format!(
                "slope {name} does not support H (violation {viol})"
            )));
        }
    }
    Ok(h)
}

/// The five menu values of the construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleValues {
    pub h: f64,
    pub f: f64,
    pub g: f64,
    pub intersection: f64,
    pub union: f64,
}

/// A replayable violation of independence of irrelevant alternatives.
///
/// `F = H ∪ {f_α}` and `G = H ∪ {f_β}` are each as good as `H` (and as their
/// intersection), yet their union is strictly better: worth at least
/// `½ δ·ε`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleReport {
    /// Present when the model was built from a specification, which is what
    /// makes the report replayable.
    pub cost: Option<CostSpec>,
    pub prior: Belief,
    pub grid_resolution: usize,
    pub certificate: NdisdCertificate,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub f_alpha: Act,
    pub f_beta: Act,
    pub h: Menu,
    pub f: Menu,
    pub g: Menu,
    pub values: CounterexampleValues,
    pub predicted_lower_bound: f64,
    pub verdict: Verdict,
}

pub fn build_iia_counterexample(
    model: &CostModel,
    cert: &NdisdCertificate,
) -> Result<CounterexampleReport> {
    build_iia_counterexample_with(model, cert, default_resolution(model.dim()))
}

/// Search `ε = t δ/‖δ‖` for `t = ¼, ⅛, …` until both `p̄₀ ± ε` lie in the
/// domain and the construction verifies.
pub fn build_iia_counterexample_with(
    model: &CostModel,
    cert: &NdisdCertificate,
    resolution: usize,
) -> Result<CounterexampleReport> {
    let base_grid = grid_with(model, resolution, &cert.points)?;
    let h = build_menu_h_on(model, cert, &base_grid)?;
    let chart = model.chart();
    let domain = model.domain();
    let y0 = model.prior_chart().to_vec();
    let dn = norm(&cert.delta);
    let mut t = 0.25;
    let mut last_err = Error::EpsilonSearchFailed;
    for _ in 0..MAX_HALVINGS {
        let eps: Vec<f64> = cert.delta.iter().map(|d| t * d / dn).collect();
        t *= 0.5;
        let (y_plus, y_minus) = (add(&y0, &eps), sub(&y0, &eps));
        let p_plus = Belief::from_rounded(chart.invert_raw(&y_plus));
        let p_minus = Belief::from_rounded(chart.invert_raw(&y_minus));
        let inside = |y: &[f64]| domain.contains(&chart.invert_raw(y), 1e-12);
        if !inside(&y_plus) || !inside(&y_minus) {
            continue;
        }
        let (Ok(sub_plus), Ok(sub_minus)) =
            (model.psi_subdiff(&p_plus), model.psi_subdiff(&p_minus))
        else {
            continue;
        };
        let alpha = sub_plus.min_norm_point()?;
        let beta = sub(&sub_minus.min_norm_point()?, &cert.delta);
        let mut f_alpha = act_from_affine(chart, &alpha, &y_plus, model.psi_value(&p_plus)?);
        f_alpha.label = "f_alpha".into();
        let level_beta = model.psi_value(&p_minus)? + dot(&cert.delta, &eps);
        let mut f_beta = act_from_affine(chart, &beta, &y_minus, level_beta);
        f_beta.label = "f_beta".into();
        let f = menu_union(&h, &Menu::singleton(f_alpha.clone()));
        let g = menu_union(&h, &Menu::singleton(f_beta.clone()));
        let mut report = CounterexampleReport {
            cost: model.spec().cloned(),
            prior: model.prior().clone(),
            grid_resolution: resolution,
            certificate: cert.clone(),
            epsilon: eps.clone(),
            delta: cert.delta.clone(),
            alpha,
            beta,
            f_alpha,
            f_beta,
            h: h.clone(),
            f,
            g,
            values: CounterexampleValues {
                h: 0.0,
                f: 0.0,
                g: 0.0,
                intersection: 0.0,
                union: 0.0,
            },
            predicted_lower_bound: 0.5 * dot(&cert.delta, &eps),
            verdict: Verdict::PremiseFails,
        };
        let grid = base_grid.with_knots(model, &[p_plus, p_minus])?;
        match evaluate(model, &mut report, &grid) {
            Ok(()) => return Ok(report),
            Err(e) => last_err = e,
        }
    }
    Err(match last_err {
        Error::Postcondition(_) => last_err,
        _ => Error::EpsilonSearchFailed,
    })
}

/// Fill in the values and verdict, failing if the construction does not
/// check out.
fn evaluate(model: &CostModel, report: &mut CounterexampleReport, grid: &Grid) -> Result<()> {
    let value = |m: &Menu| solve_menu(model, m, grid).map(|r| r.value);
    let inter = menu_intersection(&report.f, &report.g)
        .ok_or_else(|| Error::Postcondition("F and G share no act".into()))?;
    let union = menu_union(&report.f, &report.g);
    report.values = CounterexampleValues {
        h: value(&report.h)?,
        f: value(&report.f)?,
        g: value(&report.g)?,
        intersection: value(&inter)?,
        union: value(&union)?,
    };
    let v = &report.values;
    let premise = [v.f, v.g, v.intersection]
        .iter()
        .all(|x| (x - v.h).abs() <= TOL_VALUE);
    if !premise {
        return Err(Error::Postcondition(format!(
            "premise menus differ: H {}, F {}, G {}, F∩G {}",
            v.h, v.f, v.g, v.intersection
        )));
    }
    if v.union < report.predicted_lower_bound - TOL_VALUE {
        return Err(Error::Postcondition(format!(
            "V(F∪G) = {} is below the bound {}",
            v.union, report.predicted_lower_bound
        )));
    }
    report.verdict = if v.union - v.intersection > 10.0 * TOL_VALUE {
        Verdict::Violated
    } else {
        Verdict::Satisfied
    };
    Ok(())
}

/// Rebuild the model from the report alone and re-check every value.
pub fn verify_counterexample(report: &CounterexampleReport) -> Result<CounterexampleValues> {
    let spec = report
        .cost
        .as_ref()
        .ok_or_else(|| Error::CertificateInvalid("report carries no cost specification".into()))?;
    let model = make_cost(spec, &report.prior)?;
    report.certificate.validate(&model)?;
    let chart = model.chart();
    let y0 = model.prior_chart();
    let knots = [
        Belief::from_rounded(chart.invert_raw(&add(y0, &report.epsilon))),
        Belief::from_rounded(chart.invert_raw(&sub(y0, &report.epsilon))),
    ];
    let grid = grid_with(&model, report.grid_resolution, &report.certificate.points)?
        .with_knots(&model, &knots)?;
    let mut replay = report.clone();
    evaluate(&model, &mut replay, &grid)?;
    let (a, b) = (&replay.values, &report.values);
    let drift = [
        (a.h, b.h),
        (a.f, b.f),
        (a.g, b.g),
        (a.intersection, b.intersection),
        (a.union, b.union),
    ]
    .iter()
    .map(|(x, y)| (x - y).abs())
    .fold(0.0, f64::max);
    if drift > TOL_VALUE || replay.verdict != report.verdict {
        return Err(Error::CertificateInvalid(format!(
            "replayed values differ by {drift}"
        )));
    }
    Ok(replay.values)
}

/// An act `h` with `h ∼ F ∼ F ∪ {h}`.
///
/// Its slope is the menu's optimal-hyperplane slope plus the minimal-norm
/// subgradient at the prior; its value at the prior is `V(F)`.
pub fn ignorance_equivalent(
    model: &CostModel,
    menu: &Menu,
    solve: &SolveReport,
    lam: &HyperplaneSet,
    grid: &Grid,
) -> Result<Act> {
    if lam.max_width > TOL_WIDTH {
        return Err(Error::NonUniqueHyperplane {
            width: lam.max_width,
        });
    }
    ignorance_equivalent_with_slope(model, menu, solve, &lam.witness, grid)
}

/// As [`ignorance_equivalent`] with an explicit choice of optimal slope.
pub fn ignorance_equivalent_with_slope(
    model: &CostModel,
    menu: &Menu,
    solve: &SolveReport,
    lambda: &[f64],
    grid: &Grid,
) -> Result<Act> {
    let g = model.psi_subdiff(model.prior())?.min_norm_point()?;
    let mut h = act_from_affine(
        model.chart(),
        &add(lambda, &g),
        model.prior_chart(),
        solve.value,
    );
    h.label = "h".into();
    let alone = h.expected(model.prior());
    let joint = solve_menu(model, &menu_union(menu, &Menu::singleton(h.clone())), grid)?.value;
    if (alone - solve.value).abs() > TOL_VALUE || (joint - solve.value).abs() > TOL_VALUE {
        return Err(Error::Postcondition(format!(
            "V(h) = {alone}, V(F ∪ h) = {joint}, V(F) = {}",
            solve.value
        )));
    }
    Ok(h)
}

use serde::Serialize;

use crate::beliefs::{Grid, PosteriorDistribution};
use crate::costs::FinitePsiModel;
use crate::linalg::sub;
use crate::lp::{LpOutcome, StandardLp};
use crate::menus::{menu_phi, Menu};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct FiniteSolveReport {
    pub value: f64,
    pub optimal_pi: PosteriorDistribution,
    pub gross_payoff: f64,
    pub info_cost: f64,
    /// Indices of the components attaining the maximum at the optimum.
    pub binding_components: Vec<usize>,
}

/// Menu value under a finite family on a grid.
///
/// Every component cost is an epigraph row,
///
/// ```text
/// max Σ w_j φ(y_j) - t + normalizer
/// s.t. Σ w_j ψ_k(y_j) ≤ t for every k,  Σ w_j (y_j - y₀) = 0,  Σ w_j = 1,
/// ```
///
/// so the maximum over components is enumerated exactly for every
/// grid-supported distribution.
pub fn solve_finite(model: &FinitePsiModel, menu: &Menu, grid: &Grid) -> Result<FiniteSolveReport> {
    let chart = model.chart();
    let m = chart.dim();
    let k = model.components().len();
    let y0 = chart.apply(model.prior().as_slice());
    let rows = m + 1 + k;
    let mut lp = StandardLp::new(rows);
    lp.rhs[m] = 1.0;
    let mut cols = Vec::new();
    for (b, y) in grid.points().iter().zip(grid.coords()) {
        let vals = model.component_values(b);
        if vals.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let (phi, _) = menu_phi(menu, b);
        let mut col = sub(y, &y0);
        col.push(1.0);
        col.extend(vals);
        lp.push_column(col, phi);
        cols.push(b.clone());
    }
    if cols.is_empty() {
        return Err(Error::InfeasibleGrid);
    }
    let mut t_col = vec![0.0; rows];
    for r in 0..k {
        t_col[m + 1 + r] = -1.0;
    }
    let t_plus = lp.push_column(t_col.clone(), -1.0);
    let t_minus = lp.push_column(t_col.iter().map(|v| -v).collect(), 1.0);
    for r in 0..k {
        let mut s = vec![0.0; rows];
        s[m + 1 + r] = 1.0;
        lp.push_column(s, 0.0);
    }
    let sol = match lp.maximize() {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible => return Err(Error::InfeasibleGrid),
        LpOutcome::Unbounded => return Err(Error::UnboundedObjective),
    };
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for (j, b) in cols.iter().enumerate() {
        if sol.x[j] > 1e-12 {
            support.push(b.clone());
            probs.push(sol.x[j]);
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let pi = PosteriorDistribution::new(support, probs, model.prior().clone())?;
    let gross = pi.expectation(|s| menu_phi(menu, s).0);
    let info_cost = model.finite_max_cost(&pi)?;
    let t = sol.x[t_plus] - sol.x[t_minus];
    let binding_components = model
        .components()
        .iter()
        .enumerate()
        .filter(|(_, c)| (pi.expectation(|s| c.value(s.as_slice())) - t).abs() <= 1e-9)
        .map(|(i, _)| i)
        .collect();
    Ok(FiniteSolveReport {
        value: sol.objective + model.normalizer(),
        optimal_pi: pi,
        gross_payoff: gross,
        info_cost,
        binding_components,
    })
}

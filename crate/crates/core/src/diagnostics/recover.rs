use serde::Serialize;

use crate::beliefs::{Belief, Grid};
use crate::costs::CostModel;
use crate::menus::{act_from_affine, Act, Menu};
use crate::solver::solve_menu;
use crate::{Error, Result, TOL_VALUE};

/// `ψ` rebuilt from acts that are irrelevant next to the zero act.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveredPsi {
    pub points: Vec<Belief>,
    pub psi: Vec<f64>,
    pub psi_hat: Vec<f64>,
    /// The tangent acts used, each verified irrelevant.
    pub acts: Vec<Act>,
    pub max_error: f64,
}

/// True when adding `h` to the zero act gains nothing: `V({0, h}) ≤ TOL_VALUE`.
pub fn is_irrelevant(model: &CostModel, h: &Act, grid: &Grid) -> Result<bool> {
    let menu = Menu::new(vec![Act::zero(model.n_states()), h.clone()])?;
    Ok(solve_menu(model, &menu, grid)?.value <= TOL_VALUE)
}

/// `ψ̂(p) = max { E_p h : 0 ∼ {0, h} }` over tangent acts at every grid
/// point (one per subdifferential vertex), evaluated on the grid.
///
/// Each tangent act is checked for irrelevance with the solver before it
/// enters the maximum, so the result rests on menu values alone.
pub fn recover_psi(model: &CostModel, grid: &Grid) -> Result<RecoveredPsi> {
    let chart = model.chart();
    let mut acts = Vec::new();
    for (q, y) in grid.points().iter().zip(grid.coords()) {
        let level = model.psi_value(q)?;
        let Ok(sub) = model.psi_subdiff(q) else {
            continue;
        };
        for g in &sub.vertices {
            let mut h = act_from_affine(chart, g, y, level);
            h.label = format!("tangent{}", acts.len());
            if acts.iter().any(|a: &Act| a.same_payoffs(&h)) {
                continue;
            }
            if !is_irrelevant(model, &h, grid)? {
                return Err(Error::Postcondition(format!(
                    "tangent act at {:?} is not irrelevant",
                    q.as_slice()
                )));
            }
            acts.push(h);
        }
    }
    let mut psi = Vec::with_capacity(grid.len());
    let mut psi_hat = Vec::with_capacity(grid.len());
    let mut max_error: f64 = 0.0;
    for p in grid.points() {
        let exact = model.psi_value(p)?;
        let hat = acts
            .iter()
            .map(|a| a.expected(p))
            .fold(f64::NEG_INFINITY, f64::max);
        max_error = max_error.max((exact - hat).abs());
        psi.push(exact);
        psi_hat.push(hat);
    }
    Ok(RecoveredPsi {
        points: grid.points().to_vec(),
        psi,
        psi_hat,
        acts,
        max_error,
    })
}

//! Menu values by concavification.
//!
//! [`solve_menu`] solves the linear program over Bayes-plausible
//! distributions supported on a grid,
//!
//! ```text
//! max Σ_j w_j N(y_j)   s.t.  Σ_j w_j (y_j - y₀) = 0,  Σ_j w_j = 1,  w ≥ 0,
//! ```
//!
//! with `N = φ_F - ψ̄`. The row multipliers are a supporting hyperplane
//! `λ·(y - y₀) + V`. Unless disabled, the grid solution is then refined by
//! column generation: the exact conjugate of the measure prices the most
//! profitable off-grid posterior for the current hyperplane, which is added
//! as a column until none improves.

mod exact1d;
mod finite;
mod lambda;

pub use exact1d::concavify_1d_exact;
pub use finite::{solve_finite, FiniteSolveReport};
pub use lambda::{
    lambda_set, lambda_set_seeded, probe_directions, HyperplaneSet, DEFAULT_PROBE_SEED,
};

use serde::Serialize;

use crate::beliefs::{Belief, Grid, PosteriorDistribution};
use crate::costs::CostModel;
use crate::linalg::{dot, max_abs_diff, sub};
use crate::lp::{LpOutcome, StandardLp};
use crate::menus::{menu_phi, Menu};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Run column generation after the grid LP.
    pub refine: bool,
    pub max_refine_rounds: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            refine: true,
            max_refine_rounds: 200,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridStats {
    pub resolution: usize,
    pub points: usize,
    /// Off-grid posteriors added by refinement.
    pub refined_columns: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub value: f64,
    pub optimal_pi: PosteriorDistribution,
    /// Index (into the menu) of the act chosen at each support point; the
    /// lowest index among ties.
    pub assignments: Vec<usize>,
    pub gross_payoff: f64,
    pub info_cost: f64,
    /// A supporting hyperplane `λ·(y - y₀) + value` from the LP duals.
    pub dual_slope: Vec<f64>,
    pub grid_stats: GridStats,
}

/// Value of a menu on a grid (with refinement); see the module docs.
pub fn solve_menu(model: &CostModel, menu: &Menu, grid: &Grid) -> Result<SolveReport> {
    solve_menu_with(model, menu, grid, &SolveOptions::default())
}

pub fn solve_menu_with(
    model: &CostModel,
    menu: &Menu,
    grid: &Grid,
    options: &SolveOptions,
) -> Result<SolveReport> {
    let mut c = Concavifier::new(model, menu, grid)?;
    let primal = if options.refine {
        c.refine(options.max_refine_rounds)?
    } else {
        c.primal()?
    };
    c.report(&primal, grid)
}

/// Primal LP solution over the current columns.
#[derive(Clone, Debug)]
pub(crate) struct Primal {
    pub value: f64,
    pub weights: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Columns of the concavification LP for one model and menu.
pub(crate) struct Concavifier<'a> {
    pub model: &'a CostModel,
    pub menu: &'a Menu,
    pub forms: Vec<(Vec<f64>, f64)>,
    pub ys: Vec<Vec<f64>>,
    pub beliefs: Vec<Belief>,
    pub nets: Vec<f64>,
    pub y0: Vec<f64>,
    grid_len: usize,
    scale: f64,
}

const REFINE_TOL: f64 = 1e-15;

impl<'a> Concavifier<'a> {
    pub fn new(model: &'a CostModel, menu: &'a Menu, grid: &Grid) -> Result<Self> {
        if menu.n_states() != model.n_states() {
            return Err(Error::DimensionMismatch {
                expected: model.n_states(),
                got: menu.n_states(),
            });
        }
        let forms = menu.affine_forms(model.chart());
        let mut c = Concavifier {
            model,
            menu,
            forms,
            ys: Vec::with_capacity(grid.len()),
            beliefs: Vec::with_capacity(grid.len()),
            nets: Vec::with_capacity(grid.len()),
            y0: model.prior_chart().to_vec(),
            grid_len: 0,
            scale: 1.0,
        };
        for b in grid.points() {
            c.insert(b.clone(), false);
        }
        if c.ys.is_empty() {
            return Err(Error::InfeasibleGrid);
        }
        c.grid_len = c.ys.len();
        Ok(c)
    }

    /// Add a posterior column; returns false for duplicates or points outside
    /// the domain.
    pub fn push(&mut self, b: Belief) -> bool {
        self.insert(b, true)
    }

    fn insert(&mut self, b: Belief, check_duplicates: bool) -> bool {
        let psi = self.model.measure().value(b.as_slice());
        if !psi.is_finite() {
            return false;
        }
        let y = self.model.chart().apply(b.as_slice());
        if check_duplicates && self.ys.iter().any(|z| max_abs_diff(z, &y) <= 1e-14) {
            return false;
        }
        let (phi, _) = menu_phi(self.menu, &b);
        let net = phi - psi;
        self.scale = self.scale.max(net.abs());
        self.ys.push(y);
        self.beliefs.push(b);
        self.nets.push(net);
        true
    }

    pub fn refined_columns(&self) -> usize {
        self.ys.len() - self.grid_len
    }

    pub fn primal(&self) -> Result<Primal> {
        let m = self.y0.len();
        let mut lp = StandardLp::new(m + 1);
        lp.rhs[m] = 1.0;
        for (y, net) in self.ys.iter().zip(&self.nets) {
            let mut col = sub(y, &self.y0);
            col.push(1.0);
            lp.push_column(col, *net);
        }
        match lp.maximize() {
            LpOutcome::Optimal(s) => Ok(Primal {
                value: s.objective,
                weights: s.x,
                lambda: s.duals[..m].to_vec(),
            }),
            LpOutcome::Infeasible => Err(Error::InfeasibleGrid),
            LpOutcome::Unbounded => Err(Error::UnboundedObjective),
        }
    }

    /// Most profitable posterior against the hyperplane `λ·(y - y₀) + v`:
    /// returns it and its violation `N(y) - λ·(y - y₀) - v`.
    pub fn price(&self, lambda: &[f64], v: f64) -> (Belief, f64) {
        let mut best: Option<(Belief, f64)> = None;
        for (alpha, beta) in &self.forms {
            let s = sub(alpha, lambda);
            let (b, _, conj) = self.model.conjugate(&s);
            let viol = conj + beta + dot(lambda, &self.y0) - v;
            if best.as_ref().is_none_or(|(_, bv)| viol > *bv) {
                best = Some((b, viol));
            }
        }
        best.expect("menus are nonempty")
    }

    pub fn tolerance(&self) -> f64 {
        REFINE_TOL * self.scale
    }

    pub fn refine(&mut self, rounds: usize) -> Result<Primal> {
        let mut primal = self.primal()?;
        for _ in 0..rounds {
            let (b, viol) = self.price(&primal.lambda, primal.value);
            if viol <= self.tolerance() || !self.push(b) {
                break;
            }
            primal = self.primal()?;
        }
        Ok(primal)
    }

    pub fn report(&self, primal: &Primal, grid: &Grid) -> Result<SolveReport> {
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for (j, w) in primal.weights.iter().enumerate() {
            if *w > 1e-12 {
                support.push(self.beliefs[j].clone());
                probs.push(*w);
            }
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let pi = PosteriorDistribution::new(support, probs, self.model.prior().clone())?;
        let mut gross = 0.0;
        let mut cost = 0.0;
        let mut assignments = Vec::with_capacity(pi.len());
        for (s, w) in pi.support().iter().zip(pi.probs()) {
            let (phi, arg) = menu_phi(self.menu, s);
            gross += w * phi;
            cost += w * self.model.psi_value(s)?;
            assignments.push(arg[0]);
        }
        Ok(SolveReport {
            value: primal.value,
            optimal_pi: pi,
            assignments,
            gross_payoff: gross,
            info_cost: cost,
            dual_slope: primal.lambda.clone(),
            grid_stats: GridStats {
                resolution: grid.resolution(),
                points: grid.len(),
                refined_columns: self.refined_columns(),
            },
        })
    }
}

//! Dense linear programs in equality standard form,
//!
//! ```text
//! maximize cᵀx  subject to  A x = b,  x ≥ 0,
//! ```
//!
//! solved by a two-phase revised simplex method with an explicit basis
//! inverse and Bland's anti-cycling rule. The problems this crate builds have
//! few rows (chart dimension plus a handful) and many columns (grid points),
//! which is the shape this layout is good at. Columns are stored
//! individually so callers can append them between solves.

/// An LP in equality standard form; see the module docs.
#[derive(Clone, Debug, Default)]
pub struct StandardLp {
    pub rows: usize,
    pub columns: Vec<Vec<f64>>,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row multipliers `y = c_Bᵀ B⁻¹`; they satisfy `yᵀA_j ≥ c_j` for every
    /// column at optimality.
    pub duals: Vec<f64>,
    pub basis: Vec<usize>,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
const MAX_PIVOTS: usize = 200_000;

impl StandardLp {
    pub fn new(rows: usize) -> Self {
        StandardLp {
            rows,
            columns: Vec::new(),
            cost: Vec::new(),
            rhs: vec![0.0; rows],
        }
    }

    pub fn push_column(&mut self, column: Vec<f64>, cost: f64) -> usize {
        debug_assert_eq!(column.len(), self.rows);
        self.columns.push(column);
        self.cost.push(cost);
        self.columns.len() - 1
    }

    pub fn maximize(&self) -> LpOutcome {
        Simplex::new(self).run()
    }
}

struct Simplex<'a> {
    lp: &'a StandardLp,
    m: usize,
    n: usize,
    sign: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    pivots_since_refactor: usize,
    rc_tol: f64,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a StandardLp) -> Self {
        let m = lp.rows;
        let n = lp.columns.len();
        let sign: Vec<f64> = lp
            .rhs
            .iter()
            .map(|b| if *b < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let rhs: Vec<f64> = lp.rhs.iter().zip(&sign).map(|(b, s)| b * s).collect();
        let scale = lp.cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        Simplex {
            lp,
            m,
            n,
            sign,
            rhs: rhs.clone(),
            basis: (n..n + m).collect(),
            binv: crate::linalg::identity(m),
            xb: rhs,
            pivots_since_refactor: 0,
            rc_tol: 1e-14 * scale,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n
    }

    /// Column `j` with row signs applied; artificials are unit vectors.
    fn column(&self, j: usize) -> Vec<f64> {
        if self.is_artificial(j) {
            let mut e = vec![0.0; self.m];
            e[j - self.n] = 1.0;
            e
        } else {
            self.lp.columns[j]
                .iter()
                .zip(&self.sign)
                .map(|(a, s)| a * s)
                .collect()
        }
    }

    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = cost(bj);
            if cb != 0.0 {
                crate::linalg::axpy(&mut y, cb, &self.binv[i]);
            }
        }
        y
    }

    fn refactor(&mut self) -> bool {
        let cols: Vec<Vec<f64>> = self.basis.iter().map(|&j| self.column(j)).collect();
        // B has the basic columns as columns.
        let b: Vec<Vec<f64>> = (0..self.m)
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect();
        match crate::linalg::invert(&b) {
            Some(inv) => {
                self.binv = inv;
                self.xb = crate::linalg::mat_vec(&self.binv, &self.rhs);
                for v in self.xb.iter_mut() {
                    if *v < 0.0 && *v > -1e-11 {
                        *v = 0.0;
                    }
                }
                self.pivots_since_refactor = 0;
                true
            }
            None => false,
        }
    }

    /// One simplex phase. Returns `Ok(())` at optimality, `Err(())` when
    /// unbounded.
    fn phase(&mut self, cost: &dyn Fn(usize) -> f64, phase_two: bool) -> Result<(), ()> {
        for _ in 0..MAX_PIVOTS {
            let y = self.duals(cost);
            let mut entering = None;
            for j in 0..self.n {
                if self.basis.contains(&j) {
                    continue;
                }
                let col = &self.lp.columns[j];
                let mut z = 0.0;
                for i in 0..self.m {
                    z += y[i] * col[i] * self.sign[i];
                }
                if cost(j) - z > self.rc_tol {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            let a = self.column(j);
            let d = crate::linalg::mat_vec(&self.binv, &a);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let ratio = if d[i] > PIVOT_TOL {
                    self.xb[i].max(0.0) / d[i]
                } else if phase_two && self.is_artificial(self.basis[i]) && d[i].abs() > PIVOT_TOL {
                    // Artificials left in the basis are pinned at zero.
                    0.0
                } else {
                    continue;
                };
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - 1e-15 * (1.0 + best)
                            || (ratio <= best + 1e-15 * (1.0 + best)
                                && self.basis[i] < self.basis[r])
                        {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, theta)) = leave else {
                return Err(());
            };
            self.pivot(r, j, &d, theta);
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, j: usize, d: &[f64], theta: f64) {
        for i in 0..self.m {
            if i != r {
                self.xb[i] -= theta * d[i];
                if self.xb[i] < 0.0 && self.xb[i] > -1e-13 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;
        let pr = d[r];
        let row_r: Vec<f64> = self.binv[r].iter().map(|v| v / pr).collect();
        for i in 0..self.m {
            if i != r && d[i] != 0.0 {
                let f = d[i];
                for (bv, rv) in self.binv[i].iter_mut().zip(&row_r) {
                    *bv -= f * rv;
                }
            }
        }
        self.binv[r] = row_r;
        self.basis[r] = j;
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    fn run(mut self) -> LpOutcome {
        let n = self.n;
        // Phase one: drive the artificials to zero.
        let phase_one_cost = move |j: usize| if j >= n { -1.0 } else { 0.0 };
        if self.phase(&phase_one_cost, false).is_err() {
            return LpOutcome::Infeasible;
        }
        self.refactor();
        let infeas: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(j, _)| **j >= n)
            .map(|(_, v)| v.abs())
            .sum();
        let rhs_scale = self.rhs.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if infeas > 1e-9 * rhs_scale {
            return LpOutcome::Infeasible;
        }
        // Try to pivot remaining artificials out on real columns.
        for r in 0..self.m {
            if self.basis[r] < n {
                continue;
            }
            for j in 0..n {
                if self.basis.contains(&j) {
                    continue;
                }
                let d = crate::linalg::mat_vec(&self.binv, &self.column(j));
                if d[r].abs() > 1e-9 {
                    self.pivot(r, j, &d, 0.0);
                    self.xb[r] = 0.0;
                    break;
                }
            }
        }
        self.refactor();
        let lp = self.lp;
        let phase_two_cost = move |j: usize| if j >= n { 0.0 } else { lp.cost[j] };
        if self.phase(&phase_two_cost, true).is_err() {
            return LpOutcome::Unbounded;
        }
        self.refactor();
        let mut x = vec![0.0; n];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < n {
                x[j] = self.xb[i].max(0.0);
            }
        }
        let objective = x.iter().zip(&lp.cost).map(|(a, b)| a * b).sum();
        let y = self.duals(&phase_two_cost);
        let duals = y.iter().zip(&self.sign).map(|(v, s)| v * s).collect();
        LpOutcome::Optimal(LpSolution {
            x,
            objective,
            duals,
            basis: self.basis.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(o: LpOutcome) -> LpSolution {
        match o {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 (slacks s1..s3).
        let mut lp = StandardLp::new(3);
        lp.rhs = vec![4.0, 12.0, 18.0];
        lp.push_column(vec![1.0, 0.0, 3.0], 3.0);
        lp.push_column(vec![0.0, 2.0, 2.0], 5.0);
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            lp.push_column(e, 0.0);
        }
        let s = optimal(lp.maximize());
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        // Known duals (0, 1.5, 1).
        assert!((s.duals[1] - 1.5).abs() < 1e-12 && (s.duals[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = StandardLp::new(1);
        lp.rhs = vec![-1.0];
        lp.push_column(vec![1.0], 1.0);
        assert!(matches!(lp.maximize(), LpOutcome::Infeasible));

        let mut lp = StandardLp::new(1);
        lp.rhs = vec![1.0];
        lp.push_column(vec![1.0], 0.0);
        lp.push_column(vec![-1.0], 0.0);
        lp.push_column(vec![0.0], 1.0);
        assert!(matches!(lp.maximize(), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let mut lp = StandardLp::new(2);
        lp.rhs = vec![1.0, 2.0];
        lp.push_column(vec![1.0, 2.0], 1.0);
        lp.push_column(vec![1.0, 2.0], 2.0);
        let s = optimal(lp.maximize());
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_duals_keep_original_sign() {
        // max -x s.t. -x = -2 → x = 2, dual y with y·(-1) ≥ -1 tight → y = 1.
        let mut lp = StandardLp::new(1);
        lp.rhs = vec![-2.0];
        lp.push_column(vec![-1.0], -1.0);
        let s = optimal(lp.maximize());
        assert!((s.objective + 2.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
    }
}

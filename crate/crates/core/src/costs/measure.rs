use itertools::Itertools;

use crate::beliefs::{Domain, Halfspace};
use crate::linalg::{dot, max_abs_diff, rank, solve};
use crate::{Error, Result};

/// One quadratic piece `pᵀQp + b·p + c` valid on the cell `{p : a·p ≤ β}`,
/// all in belief coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticPiece {
    pub q: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: f64,
    pub cell: Vec<Halfspace>,
}

const CELL_TOL: f64 = 1e-12;

impl QuadraticPiece {
    pub fn value(&self, p: &[f64]) -> f64 {
        let qp: f64 = self.q.iter().zip(p).map(|(row, pi)| pi * dot(row, p)).sum();
        qp + dot(&self.b, p) + self.c
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        self.q
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| 2.0 * dot(row, p) + bi)
            .collect()
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.cell.iter().all(|h| h.slack(p) >= -tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Family {
    /// `Σ p ln p` on a coordinate face of the simplex.
    Entropy,
    PiecewiseQuadratic(Vec<QuadraticPiece>),
}

/// A convex function on a polytope of beliefs, `family(p) + ℓ·p + k`.
///
/// This is the raw object handed to canonicalization; it carries the domain
/// and any kinks declared by the specification.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    pub(crate) family: Family,
    pub(crate) linear: Vec<f64>,
    pub(crate) constant: f64,
    pub(crate) domain: Domain,
    pub(crate) kinks: Vec<Vec<f64>>,
}

impl Measure {
    /// Negative Shannon entropy on the full simplex.
    pub fn negative_entropy(n: usize) -> Self {
        Measure {
            family: Family::Entropy,
            linear: vec![0.0; n],
            constant: 0.0,
            domain: Domain::simplex(n),
            kinks: Vec::new(),
        }
    }

    /// A continuous convex piecewise quadratic.
    pub fn piecewise_quadratic(
        domain: Domain,
        pieces: Vec<QuadraticPiece>,
        kinks: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidSpec("no quadratic pieces".into()));
        }
        let n = domain.n_states();
        for piece in &pieces {
            if piece.q.len() != n
                || piece.q.iter().any(|r| r.len() != n)
                || piece.b.len() != n
                || piece.cell.iter().any(|h| h.normal.len() != n)
            {
                return Err(Error::WrongLength {
                    expected: n,
                    got: piece.b.len(),
                });
            }
        }
        Ok(Measure {
            family: Family::PiecewiseQuadratic(pieces),
            linear: vec![0.0; n],
            constant: 0.0,
            domain,
            kinks,
        })
    }

    pub fn n_states(&self) -> usize {
        self.domain.n_states()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_entropy(&self) -> bool {
        matches!(self.family, Family::Entropy)
    }

    pub fn pieces(&self) -> Option<&[QuadraticPiece]> {
        match &self.family {
            Family::PiecewiseQuadratic(p) => Some(p),
            Family::Entropy => None,
        }
    }

    /// Declared kink locations (beliefs).
    pub fn declared_kinks(&self) -> &[Vec<f64>] {
        &self.kinks
    }

    /// `ψ + ξ·(p - anchor)`.
    pub fn tilted(&self, xi: &[f64], anchor: &[f64]) -> Measure {
        let mut m = self.clone();
        for (l, x) in m.linear.iter_mut().zip(xi) {
            *l += x;
        }
        m.constant -= dot(xi, anchor);
        m
    }

    /// `ψ + k`.
    pub fn shifted(&self, k: f64) -> Measure {
        let mut m = self.clone();
        m.constant += k;
        m
    }

    pub(crate) fn restricted_to(&self, domain: Domain) -> Measure {
        let mut m = self.clone();
        m.domain = domain;
        m
    }

    /// Value at a belief; `+∞` outside the domain (or outside every cell).
    pub fn value(&self, p: &[f64]) -> f64 {
        if !self.domain.contains(p, CELL_TOL) {
            return f64::INFINITY;
        }
        let f = match &self.family {
            Family::Entropy => p
                .iter()
                .filter(|v| **v > 0.0)
                .map(|v| v * v.ln())
                .sum::<f64>(),
            Family::PiecewiseQuadratic(pieces) => {
                match pieces.iter().find(|pc| pc.contains(p, CELL_TOL)) {
                    Some(pc) => pc.value(p),
                    None => return f64::INFINITY,
                }
            }
        };
        f + dot(&self.linear, p) + self.constant
    }

    /// Gradients of the active smooth pieces at `p` in belief coordinates;
    /// their convex hull (plus the normal cone of the domain) is the
    /// subdifferential.
    pub fn gradients(&self, p: &[f64]) -> Result<Vec<Vec<f64>>> {
        if !self.domain.contains(p, CELL_TOL) {
            return Err(Error::OutsideDomain);
        }
        let mut grads: Vec<Vec<f64>> = match &self.family {
            Family::Entropy => {
                let mut g = vec![0.0; p.len()];
                for (j, v) in p.iter().enumerate() {
                    if self.domain.fixed_zero(j) {
                        continue;
                    }
                    if *v <= 0.0 {
                        return Err(Error::EmptySubdifferential);
                    }
                    g[j] = v.ln() + 1.0;
                }
                vec![g]
            }
            Family::PiecewiseQuadratic(pieces) => {
                let mut out: Vec<Vec<f64>> = Vec::new();
                for pc in pieces.iter().filter(|pc| pc.contains(p, CELL_TOL)) {
                    let g = pc.gradient(p);
                    if !out.iter().any(|h| max_abs_diff(h, &g) <= 1e-12) {
                        out.push(g);
                    }
                }
                if out.is_empty() {
                    return Err(Error::OutsideDomain);
                }
                out
            }
        };
        for g in grads.iter_mut() {
            for (gi, li) in g.iter_mut().zip(&self.linear) {
                *gi += li;
            }
        }
        Ok(grads)
    }

    /// Exact conjugate over the domain: `max_p u·p - ψ(p)` and a maximizer.
    pub fn conjugate(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let w: Vec<f64> = u.iter().zip(&self.linear).map(|(a, b)| a - b).collect();
        let (p, v) = match &self.family {
            Family::Entropy => entropy_conjugate(&self.domain, &w),
            Family::PiecewiseQuadratic(pieces) => {
                let mut best: Option<(Vec<f64>, f64)> = None;
                for pc in pieces {
                    if let Some((p, v)) = piece_conjugate(&self.domain, pc, &w) {
                        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                            best = Some((p, v));
                        }
                    }
                }
                best.expect("some cell meets the domain")
            }
        };
        (p, v - self.constant)
    }
}

fn entropy_conjugate(domain: &Domain, w: &[f64]) -> (Vec<f64>, f64) {
    let free: Vec<usize> = (0..w.len()).filter(|&j| !domain.fixed_zero(j)).collect();
    let wmax = free.iter().map(|&j| w[j]).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = free.iter().map(|&j| (w[j] - wmax).exp()).sum();
    let mut p = vec![0.0; w.len()];
    for &j in &free {
        p[j] = (w[j] - wmax).exp() / z;
    }
    (p, wmax + z.ln())
}

/// Maximize the concave quadratic `w·p - pᵀQp - b·p - c` over the piece's
/// cell intersected with the domain by enumerating active sets.
fn piece_conjugate(domain: &Domain, pc: &QuadraticPiece, w: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = w.len();
    let ineqs: Vec<&Halfspace> = domain.inequalities().iter().chain(&pc.cell).collect();
    let eqs = domain.equalities();
    let eq_rows: Vec<Vec<f64>> = eqs.iter().map(|h| h.normal.clone()).collect();
    let free_dim = n - rank(&eq_rows, n, 1e-10);
    let lin: Vec<f64> = w.iter().zip(&pc.b).map(|(a, b)| a - b).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for size in 0..=free_dim {
        for combo in (0..ineqs.len()).combinations(size) {
            let mut active: Vec<&Halfspace> = eqs.iter().collect();
            active.extend(combo.iter().map(|&i| ineqs[i]));
            let k = active.len();
            let dimk = n + k;
            let mut a = vec![vec![0.0; dimk]; dimk];
            let mut rhs = vec![0.0; dimk];
            for i in 0..n {
                for j in 0..n {
                    a[i][j] = 2.0 * pc.q[i][j];
                }
                rhs[i] = lin[i];
            }
            for (r, h) in active.iter().enumerate() {
                for j in 0..n {
                    a[j][n + r] = h.normal[j];
                    a[n + r][j] = h.normal[j];
                }
                rhs[n + r] = h.offset;
            }
            let Some(sol) = solve(&a, &rhs) else {
                continue;
            };
            let p = &sol[..n];
            let feasible = ineqs.iter().all(|h| h.slack(p) >= -1e-11);
            if !feasible {
                continue;
            }
            let p: Vec<f64> = p
                .iter()
                .map(|v| if *v < 0.0 && *v > -1e-11 { 0.0 } else { *v })
                .collect();
            let s: f64 = p.iter().sum();
            let p: Vec<f64> = p.iter().map(|v| v / s).collect();
            let val = dot(w, &p) - pc.value(&p);
            if best.as_ref().is_none_or(|(_, bv)| val > *bv) {
                best = Some((p, val));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_q(n: usize) -> Vec<Vec<f64>> {
        vec![vec![0.0; n]; n]
    }

    #[test]
    fn entropy_conjugate_is_log_sum_exp() {
        let m = Measure::negative_entropy(2);
        let (p, v) = m.conjugate(&[0.0, 0.0]);
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quadratic_conjugate_hits_boundary() {
        // ψ = p₂² on the 2-simplex; max_p u·p - p₂² with u = (0, 4):
        // unconstrained p₂ = 2 → clipped to p₂ = 1, value 4 - 1 = 3.
        let mut q = zero_q(2);
        q[1][1] = 1.0;
        let pc = QuadraticPiece {
            q,
            b: vec![0.0, 0.0],
            c: 0.0,
            cell: vec![],
        };
        let m = Measure::piecewise_quadratic(Domain::simplex(2), vec![pc], vec![]).unwrap();
        let (p, v) = m.conjugate(&[0.0, 4.0]);
        assert!((v - 3.0).abs() < 1e-12);
        assert!((p[1] - 1.0).abs() < 1e-12);
        let (p, v) = m.conjugate(&[0.0, 1.0]);
        assert!((p[1] - 0.5).abs() < 1e-12);
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn entropy_boundary_has_empty_subdifferential() {
        let m = Measure::negative_entropy(2);
        assert!(matches!(
            m.gradients(&[1.0, 0.0]),
            Err(Error::EmptySubdifferential)
        ));
    }
}

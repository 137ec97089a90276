use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, lstsq, rank, solve, sub};
use crate::{Error, Result};

/// The constraint `normal · p ≤ offset` (or `=` when used as an equality).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn slack(&self, p: &[f64]) -> f64 {
        self.offset - dot(&self.normal, p)
    }
}

const VERTEX_TOL: f64 = 1e-10;
const RI_SLACK: f64 = 1e-9;

/// A polytope inside the probability simplex, kept in H-representation
/// together with its enumerated vertices.
///
/// Inequalities always include `p_j ≥ 0`; equalities always include
/// `Σ p_j = 1`. Extra constraints come from a cost specification or from
/// restricting to a face.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    n: usize,
    inequalities: Vec<Halfspace>,
    equalities: Vec<Halfspace>,
    vertices: Vec<Vec<f64>>,
    implicit: Vec<bool>,
    fixed_zero: Vec<bool>,
    dim: usize,
    extra_count: usize,
}

impl Domain {
    /// The full probability simplex over `n` states.
    pub fn simplex(n: usize) -> Self {
        let inequalities = nonnegativity(n);
        let equalities = vec![sum_to_one(n)];
        let vertices = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        Domain {
            n,
            implicit: vec![n == 1; n],
            fixed_zero: vec![false; n],
            inequalities,
            equalities,
            vertices,
            dim: n - 1,
            extra_count: 0,
        }
    }

    /// The simplex cut by extra half-spaces given in belief coordinates.
    pub fn new(n: usize, extra: Vec<Halfspace>) -> Result<Self> {
        if extra.is_empty() {
            return Ok(Domain::simplex(n));
        }
        for h in &extra {
            if h.normal.len() != n {
                return Err(Error::WrongLength {
                    expected: n,
                    got: h.normal.len(),
                });
            }
        }
        let extra_count = extra.len();
        let mut inequalities = nonnegativity(n);
        inequalities.extend(extra);
        Domain::build(n, inequalities, vec![sum_to_one(n)], extra_count)
    }

    fn build(
        n: usize,
        inequalities: Vec<Halfspace>,
        equalities: Vec<Halfspace>,
        extra_count: usize,
    ) -> Result<Self> {
        let eq_rows: Vec<Vec<f64>> = equalities.iter().map(|h| h.normal.clone()).collect();
        let r_eq = rank(&eq_rows, n, 1e-10);
        let need = n.saturating_sub(r_eq);
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        for combo in (0..inequalities.len()).combinations(need) {
            let mut rows = eq_rows.clone();
            let mut rhs: Vec<f64> = equalities.iter().map(|h| h.offset).collect();
            for &i in &combo {
                rows.push(inequalities[i].normal.clone());
                rhs.push(inequalities[i].offset);
            }
            if rank(&rows, n, 1e-10) < n {
                continue;
            }
            let candidate = if rows.len() == n {
                match solve(&rows, &rhs) {
                    Some(x) => x,
                    None => continue,
                }
            } else {
                let (x, r) = lstsq(&rows, &rhs, n);
                if r > VERTEX_TOL {
                    continue;
                }
                x
            };
            let candidate: Vec<f64> = candidate
                .into_iter()
                .map(|v| if v.abs() < 1e-14 { 0.0 } else { v })
                .collect();
            let feasible = inequalities
                .iter()
                .all(|h| h.slack(&candidate) >= -VERTEX_TOL)
                && equalities
                    .iter()
                    .all(|h| h.slack(&candidate).abs() <= VERTEX_TOL);
            if feasible
                && !vertices
                    .iter()
                    .any(|v| crate::linalg::max_abs_diff(v, &candidate) <= VERTEX_TOL)
            {
                vertices.push(candidate);
            }
        }
        if vertices.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let implicit = inequalities
            .iter()
            .map(|h| vertices.iter().all(|v| h.slack(v).abs() <= VERTEX_TOL))
            .collect();
        let fixed_zero = (0..n)
            .map(|j| vertices.iter().all(|v| v[j].abs() <= 1e-14))
            .collect();
        let dirs: Vec<Vec<f64>> = vertices[1..].iter().map(|v| sub(v, &vertices[0])).collect();
        let dim = rank(&dirs, n, 1e-10);
        Ok(Domain {
            n,
            inequalities,
            equalities,
            vertices,
            implicit,
            fixed_zero,
            dim,
            extra_count,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    /// Affine dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn inequalities(&self) -> &[Halfspace] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[Halfspace] {
        &self.equalities
    }

    /// Whether the domain is the whole simplex.
    pub fn is_full_simplex(&self) -> bool {
        self.extra_count == 0 && self.equalities.len() == 1
    }

    /// Whether coordinate `j` vanishes on the whole domain.
    pub fn fixed_zero(&self, j: usize) -> bool {
        self.fixed_zero[j]
    }

    /// Whether every inequality defining the domain is a coordinate bound.
    pub fn is_coordinate_face(&self) -> bool {
        self.extra_count == 0
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.n
            && self.inequalities.iter().all(|h| h.slack(p) >= -tol)
            && self
                .equalities
                .iter()
                .all(|h| h.slack(p).abs() <= tol * (1.0 + h.offset.abs()))
    }

    /// Membership in the relative interior: every constraint that is not an
    /// implicit equality has slack at least `1e-9`.
    pub fn is_relative_interior(&self, p: &[f64]) -> bool {
        self.contains(p, 1e-12)
            && self
                .inequalities
                .iter()
                .zip(&self.implicit)
                .all(|(h, imp)| *imp || h.slack(p) >= RI_SLACK)
    }

    /// Outward normals (belief coordinates) of the non-implicit constraints
    /// active at `p`.
    pub fn active_normals(&self, p: &[f64], tol: f64) -> Vec<Vec<f64>> {
        self.inequalities
            .iter()
            .zip(&self.implicit)
            .filter(|(h, imp)| !**imp && h.slack(p) <= tol)
            .map(|(h, _)| h.normal.clone())
            .collect()
    }

    /// The smallest face containing `p` in its relative interior.
    pub fn face_through(&self, p: &[f64]) -> Result<Domain> {
        if !self.contains(p, 1e-12) {
            return Err(Error::OutsideDomain);
        }
        let mut equalities = self.equalities.clone();
        for (h, imp) in self.inequalities.iter().zip(&self.implicit) {
            if !*imp && h.slack(p) < RI_SLACK {
                equalities.push(Halfspace {
                    normal: h.normal.clone(),
                    offset: h.offset,
                });
            }
        }
        Domain::build(
            self.n,
            self.inequalities.clone(),
            equalities,
            self.extra_count,
        )
    }
}

fn nonnegativity(n: usize) -> Vec<Halfspace> {
    (0..n)
        .map(|j| {
            let mut normal = vec![0.0; n];
            normal[j] = -1.0;
            Halfspace {
                normal,
                offset: 0.0,
            }
        })
        .collect()
}

fn sum_to_one(n: usize) -> Halfspace {
    Halfspace {
        normal: vec![1.0; n],
        offset: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_simplex_has_expected_vertices() {
        // p_2 ≤ 0.5 on the 2-simplex: the segment from (1,0) to (0.5,0.5).
        let d = Domain::new(
            2,
            vec![Halfspace {
                normal: vec![0.0, 1.0],
                offset: 0.5,
            }],
        )
        .unwrap();
        assert_eq!(d.vertices().len(), 2);
        assert_eq!(d.dim(), 1);
        assert!(d.contains(&[0.75, 0.25], 1e-12));
        assert!(!d.contains(&[0.25, 0.75], 1e-12));
    }

    #[test]
    fn face_through_edge_point() {
        let d = Domain::simplex(3);
        assert!(!d.is_relative_interior(&[0.5, 0.5, 0.0]));
        let f = d.face_through(&[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(f.dim(), 1);
        assert!(f.fixed_zero(2));
        assert!(f.is_relative_interior(&[0.5, 0.5, 0.0]));
    }

    #[test]
    fn infeasible_cut_is_empty() {
        let r = Domain::new(
            2,
            vec![Halfspace {
                normal: vec![1.0, 1.0],
                offset: 0.5,
            }],
        );
        assert!(matches!(r, Err(Error::EmptyDomain)));
    }
}

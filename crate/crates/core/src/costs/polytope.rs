use itertools::Itertools;
use serde::Serialize;

use crate::linalg::{dot, max_abs_diff, norm, solve};
use crate::{Error, Result};

/// `conv(vertices) + cone(rays)` in chart coordinates.
///
/// Subdifferentials are returned in this form: vertices are the chart
/// gradients of the active smooth pieces, rays the pulled-back outward
/// normals of the domain constraints active at the point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polytope {
    pub vertices: Vec<Vec<f64>>,
    pub rays: Vec<Vec<f64>>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>, rays: Vec<Vec<f64>>) -> Self {
        let mut vs: Vec<Vec<f64>> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if !vs.iter().any(|w| max_abs_diff(w, &v) <= 1e-12) {
                vs.push(v);
            }
        }
        let mut rs: Vec<Vec<f64>> = Vec::new();
        for r in rays {
            let nr = norm(&r);
            if nr <= 1e-12 {
                continue;
            }
            let r: Vec<f64> = r.iter().map(|x| x / nr).collect();
            if !rs.iter().any(|w| max_abs_diff(w, &r) <= 1e-12) {
                rs.push(r);
            }
        }
        Polytope {
            vertices: vs,
            rays: rs,
        }
    }

    pub fn point(v: Vec<f64>) -> Self {
        Polytope {
            vertices: vec![v],
            rays: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, Vec::len)
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.rays.is_empty() && self.vertices.len() == 1
    }

    /// `max_{x ∈ P} d·x`, `+∞` if a ray points along `d`.
    pub fn support(&self, d: &[f64]) -> f64 {
        if self.rays.iter().any(|r| dot(r, d) > 1e-12) {
            return f64::INFINITY;
        }
        self.vertices
            .iter()
            .map(|v| dot(v, d))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest pairwise vertex distance (`∞` with rays).
    pub fn diameter(&self) -> f64 {
        if !self.rays.is_empty() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for (a, b) in self.vertices.iter().tuple_combinations() {
            d = d.max(norm(&crate::linalg::sub(a, b)));
        }
        d
    }

    /// Point of minimal Euclidean norm.
    ///
    /// Enumerates affinely independent subsets of generators (at most
    /// `dim + 1` of them); for each, the minimal-norm point of their affine
    /// (vertices) plus linear (rays) hull is computed from the Gram system
    /// and kept when its weights are nonnegative.
    pub fn min_norm_point(&self) -> Result<Vec<f64>> {
        if self.vertices.is_empty() {
            return Err(Error::EmptySubdifferential);
        }
        let m = self.dim();
        let gens: Vec<(&Vec<f64>, bool)> = self
            .vertices
            .iter()
            .map(|v| (v, true))
            .chain(self.rays.iter().map(|r| (r, false)))
            .collect();
        let mut best: Option<(Vec<f64>, f64)> = None;
        for size in 1..=gens.len().min(m + 1) {
            for combo in (0..gens.len()).combinations(size) {
                if !combo.iter().any(|&i| gens[i].1) {
                    continue;
                }
                let k = combo.len();
                // [G a; aᵀ 0] [z; μ] = [0; 1]
                let mut a = vec![vec![0.0; k + 1]; k + 1];
                let mut rhs = vec![0.0; k + 1];
                for (r, &i) in combo.iter().enumerate() {
                    for (c, &j) in combo.iter().enumerate() {
                        a[r][c] = dot(gens[i].0, gens[j].0);
                    }
                    let is_vertex = if gens[i].1 { 1.0 } else { 0.0 };
                    a[r][k] = is_vertex;
                    a[k][r] = is_vertex;
                }
                rhs[k] = 1.0;
                let Some(sol) = solve(&a, &rhs) else {
                    continue;
                };
                if sol[..k].iter().any(|z| *z < -1e-12) {
                    continue;
                }
                let mut x = vec![0.0; m];
                for (z, &i) in sol[..k].iter().zip(&combo) {
                    crate::linalg::axpy(&mut x, z.max(0.0), gens[i].0);
                }
                let nx = norm(&x);
                if best.as_ref().is_none_or(|(_, b)| nx < *b - 1e-15) {
                    best = Some((x, nx));
                }
            }
        }
        best.map(|(x, _)| x).ok_or(Error::EmptySubdifferential)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_norm_of_interval_containing_zero() {
        let p = Polytope::new(vec![vec![-1.0], vec![1.0]], vec![]);
        assert_eq!(p.min_norm_point().unwrap(), vec![0.0]);
        let p = Polytope::new(vec![vec![0.5], vec![2.0]], vec![]);
        assert_eq!(p.min_norm_point().unwrap(), vec![0.5]);
    }

    #[test]
    fn min_norm_of_segment_in_plane() {
        let p = Polytope::new(vec![vec![1.0, -1.0], vec![1.0, 1.0]], vec![]);
        let x = p.min_norm_point().unwrap();
        assert!(max_abs_diff(&x, &[1.0, 0.0]) < 1e-12);
    }

    #[test]
    fn rays_can_reach_origin() {
        let p = Polytope::new(vec![vec![1.0]], vec![vec![-3.0]]);
        assert!(p.min_norm_point().unwrap()[0].abs() < 1e-12);
        assert!(p.diameter().is_infinite());
    }
}

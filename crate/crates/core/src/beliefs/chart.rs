use serde::Serialize;

use super::{Belief, Domain};
use crate::linalg::{add, dot, invert, mat_t_vec, mat_vec, max_abs_diff, rank, sub};
use crate::{Error, Result};

/// An affine bijection between the affine hull of a domain and `R^M`.
///
/// Forward: `y = A p + c`. Inverse: `p = base + J (y - y_base)` where
/// `y_base = A base + c`. `J` is also the Jacobian used to pull belief-space
/// gradients back to chart coordinates (`g_y = Jᵀ g_p`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chart {
    n: usize,
    dim: usize,
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
    base: Vec<f64>,
    base_chart: Vec<f64>,
    jacobian: Vec<Vec<f64>>,
}

/// Coordinate-selection chart for a domain.
///
/// Coordinates are picked greedily in the order `2, 3, …, n, 1` (1-based),
/// keeping each one that is independent on the affine hull. On the full
/// simplex this keeps `(p(ω₂), …, p(ωₙ))`; on two states the chart
/// coordinate is the probability of the second state.
pub fn build_chart(domain: &Domain) -> Result<Chart> {
    let n = domain.n_states();
    let verts = domain.vertices();
    if verts.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let v0 = verts[0].clone();
    let dirs: Vec<Vec<f64>> = verts[1..].iter().map(|v| sub(v, &v0)).collect();
    let dim = domain.dim();
    let mut selected_dirs: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for d in &dirs {
        let mut trial = selected_dirs.clone();
        trial.push(d.clone());
        if rank(&trial, n, 1e-10) > selected_dirs.len() {
            selected_dirs = trial;
        }
        if selected_dirs.len() == dim {
            break;
        }
    }
    let order: Vec<usize> = (1..n).chain(std::iter::once(0)).collect();
    let mut coords: Vec<usize> = Vec::with_capacity(dim);
    for &j in &order {
        if coords.len() == dim {
            break;
        }
        let mut trial = coords.clone();
        trial.push(j);
        let restricted: Vec<Vec<f64>> = selected_dirs
            .iter()
            .map(|d| trial.iter().map(|&c| d[c]).collect())
            .collect();
        if rank(&restricted, trial.len(), 1e-10) == trial.len() {
            coords = trial;
        }
    }
    coords.sort_unstable();
    // Keep the order 2, 3, …, n, 1 for the chart axes.
    coords.sort_by_key(|&c| if c == 0 { n } else { c });
    let k: Vec<Vec<f64>> = selected_dirs
        .iter()
        .map(|d| coords.iter().map(|&c| d[c]).collect())
        .collect();
    let jacobian: Vec<Vec<f64>> = if dim == 0 {
        vec![Vec::new(); n]
    } else {
        // J = Dselᵀ K⁻ᵀ, so that J restricted to the selected rows is I.
        let k_inv = invert(&k).ok_or(Error::EmptyDomain)?;
        (0..n)
            .map(|i| {
                (0..dim)
                    .map(|a| (0..dim).map(|r| selected_dirs[r][i] * k_inv[a][r]).sum())
                    .collect()
            })
            .collect()
    };
    let matrix: Vec<Vec<f64>> = coords
        .iter()
        .map(|&c| {
            let mut row = vec![0.0; n];
            row[c] = 1.0;
            row
        })
        .collect();
    let offset = vec![0.0; dim];
    let base_chart = add(&mat_vec(&matrix, &v0), &offset);
    Ok(Chart {
        n,
        dim,
        matrix,
        offset,
        base: v0,
        base_chart,
        jacobian,
    })
}

impl Chart {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    /// Chart coordinates of a belief (or any point of the affine hull).
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        add(&mat_vec(&self.matrix, p), &self.offset)
    }

    /// Inverse map without any clamping.
    pub fn invert_raw(&self, y: &[f64]) -> Vec<f64> {
        let d = sub(y, &self.base_chart);
        let mut p = self.base.clone();
        for (pi, row) in p.iter_mut().zip(&self.jacobian) {
            *pi += dot(row, &d);
        }
        p
    }

    /// Inverse map to a belief; rounding noise below `1e-12` is clamped.
    pub fn invert(&self, y: &[f64]) -> Result<Belief> {
        let p = self.invert_raw(y);
        if p.iter().any(|v| *v < -1e-12) {
            return Err(Error::OutsideDomain);
        }
        Ok(Belief::from_rounded(p))
    }

    /// Pull a belief-space linear functional back to chart coordinates.
    pub fn pullback(&self, g: &[f64]) -> Vec<f64> {
        mat_t_vec(&self.jacobian, g)
    }

    /// Linear part `A` of the forward map.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// Affine part `c` of the forward map.
    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Slope and intercept of `y ↦ u · p(y)` for a state-contingent payoff `u`.
    pub fn affine_of(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let slope = self.pullback(u);
        let intercept = dot(u, &self.base) - dot(&slope, &self.base_chart);
        (slope, intercept)
    }

    /// Compose with an invertible linear map `L` on chart coordinates:
    /// the new chart is `y' = L y`.
    pub fn relinearize(&self, l: &[Vec<f64>]) -> Result<Chart> {
        if l.len() != self.dim || l.iter().any(|r| r.len() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: l.len(),
            });
        }
        let l_inv = invert(l).ok_or_else(|| Error::InvalidSpec("singular chart map".into()))?;
        let matrix: Vec<Vec<f64>> = (0..self.dim)
            .map(|a| {
                (0..self.n)
                    .map(|j| (0..self.dim).map(|b| l[a][b] * self.matrix[b][j]).sum())
                    .collect()
            })
            .collect();
        let offset = mat_vec(l, &self.offset);
        let base_chart = mat_vec(l, &self.base_chart);
        let jacobian = self
            .jacobian
            .iter()
            .map(|row| {
                (0..self.dim)
                    .map(|a| (0..self.dim).map(|b| row[b] * l_inv[b][a]).sum())
                    .collect()
            })
            .collect();
        Ok(Chart {
            n: self.n,
            dim: self.dim,
            matrix,
            offset,
            base: self.base.clone(),
            base_chart,
            jacobian,
        })
    }

    /// Round-trip error `|invert(apply(p)) - p|` for a point of the hull.
    pub fn round_trip_error(&self, p: &[f64]) -> f64 {
        max_abs_diff(&self.invert_raw(&self.apply(p)), p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beliefs::Halfspace;

    #[test]
    fn two_state_chart_is_second_coordinate() {
        let c = build_chart(&Domain::simplex(2)).unwrap();
        assert_eq!(c.dim(), 1);
        assert_eq!(c.apply(&[0.3, 0.7]), vec![0.7]);
        assert_eq!(c.invert_raw(&[0.25]), vec![0.75, 0.25]);
        assert_eq!(c.pullback(&[0.0, 1.0]), vec![1.0]);
    }

    #[test]
    fn three_state_chart_drops_first() {
        let c = build_chart(&Domain::simplex(3)).unwrap();
        assert_eq!(c.apply(&[0.2, 0.3, 0.5]), vec![0.3, 0.5]);
        assert!(c.round_trip_error(&[0.2, 0.3, 0.5]) < 1e-15);
    }

    #[test]
    fn restricted_chart_round_trips() {
        let d = Domain::new(
            3,
            vec![Halfspace {
                normal: vec![0.0, 1.0, 1.0],
                offset: 0.6,
            }],
        )
        .unwrap();
        let c = build_chart(&d).unwrap();
        assert_eq!(c.dim(), 2);
        assert!(c.round_trip_error(&[0.5, 0.2, 0.3]) < 1e-12);
        let f = Domain::simplex(3).face_through(&[0.5, 0.5, 0.0]).unwrap();
        let c = build_chart(&f).unwrap();
        assert_eq!(c.dim(), 1);
        assert!(c.round_trip_error(&[0.25, 0.75, 0.0]) < 1e-12);
    }

    #[test]
    fn relinearize_transforms_gradients() {
        let c = build_chart(&Domain::simplex(2)).unwrap();
        let c2 = c.relinearize(&[vec![2.0]]).unwrap();
        assert_eq!(c2.apply(&[0.5, 0.5]), vec![1.0]);
        assert_eq!(c2.pullback(&[0.0, 1.0]), vec![0.5]);
        assert!(c2.round_trip_error(&[0.2, 0.8]) < 1e-15);
    }
}

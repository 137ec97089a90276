//! Small dense linear-algebra helpers on `Vec<f64>`, backed by nalgebra where
//! a factorization is needed.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `m * v` for a row-major matrix.
pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `mᵀ * v` for a row-major matrix.
pub fn mat_t_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![0.0; cols];
    for (row, vi) in m.iter().zip(v) {
        axpy(&mut out, *vi, row);
    }
    out
}

pub fn to_dmatrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Numerical rank of a set of row vectors.
pub fn rank(rows: &[Vec<f64>], ncols: usize, tol: f64) -> usize {
    if rows.is_empty() || ncols == 0 {
        return 0;
    }
    let m = to_dmatrix(rows, ncols);
    let svd = m.svd(false, false);
    let smax = svd.singular_values.max();
    if smax <= tol {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|s| **s > tol * smax.max(1.0))
        .count()
}

/// Orthonormal basis of the null space `{x : rows · x = 0}`.
pub fn null_space(rows: &[Vec<f64>], ncols: usize, tol: f64) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return (0..ncols)
            .map(|j| {
                let mut e = vec![0.0; ncols];
                e[j] = 1.0;
                e
            })
            .collect();
    }
    // Pad to a square-or-taller matrix so the full V factor is available.
    let mut padded: Vec<Vec<f64>> = rows.to_vec();
    while padded.len() < ncols {
        padded.push(vec![0.0; ncols]);
    }
    let m = to_dmatrix(&padded, ncols);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max().max(1.0);
    let mut basis = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol * smax {
            basis.push(v_t.row(k).iter().copied().collect());
        }
    }
    basis
}

/// Solve a square system; `None` when it is numerically singular.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let m = to_dmatrix(a, n);
    let lu = m.lu();
    let x = lu.solve(&DVector::from_column_slice(b))?;
    if x.iter().all(|v| v.is_finite()) {
        // Reject nearly singular systems through a residual check.
        let r = to_dmatrix(a, n) * &x - DVector::from_column_slice(b);
        let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if r.amax() <= 1e-9 * scale {
            return Some(x.iter().copied().collect());
        }
    }
    None
}

/// Least-squares solution of a possibly non-square system together with the
/// max-abs residual.
pub fn lstsq(a: &[Vec<f64>], b: &[f64], ncols: usize) -> (Vec<f64>, f64) {
    let m = to_dmatrix(a, ncols);
    let rhs = DVector::from_column_slice(b);
    let svd = m.clone().svd(true, true);
    let x = svd
        .solve(&rhs, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(ncols));
    let r = (m * &x - rhs).amax();
    (x.iter().copied().collect(), r)
}

/// Inverse of a square matrix given by rows.
pub fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let m = to_dmatrix(a, n).try_inverse()?;
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)]).collect())
            .collect(),
    )
}

pub fn transpose(a: &[Vec<f64>], ncols: usize) -> Vec<Vec<f64>> {
    (0..ncols)
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

pub fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Upper hull (monotone chain) of points sorted by x; returns hull vertices
/// left to right. Points with equal x keep only the highest.
pub fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|b, a| (a.0 - b.0).abs() <= 0.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Evaluate a piecewise-linear upper hull at `x`, returning the value and the
/// indices of the bracketing hull vertices.
pub fn eval_hull(hull: &[(f64, f64)], x: f64) -> Option<(f64, usize, usize)> {
    if hull.is_empty() || x < hull[0].0 - 1e-15 || x > hull[hull.len() - 1].0 + 1e-15 {
        return None;
    }
    if hull.len() == 1 {
        return Some((hull[0].1, 0, 0));
    }
    for k in 0..hull.len() - 1 {
        let (x0, y0) = hull[k];
        let (x1, y1) = hull[k + 1];
        if x <= x1 + 1e-15 || k == hull.len() - 2 {
            if (x - x0).abs() <= 1e-15 {
                return Some((y0, k, k));
            }
            if (x - x1).abs() <= 1e-15 {
                return Some((y1, k + 1, k + 1));
            }
            let t = (x - x0) / (x1 - x0);
            return Some((y0 + t * (y1 - y0), k, k + 1));
        }
    }
    None
}

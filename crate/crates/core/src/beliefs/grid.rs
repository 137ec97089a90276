use serde::Serialize;

use super::{Belief, Chart, Domain};
use crate::{Error, Result, TOL_SIMPLEX};

/// What a grid needs to know about the model it discretizes.
pub trait GridSource {
    fn domain(&self) -> &Domain;
    fn chart(&self) -> &Chart;
    fn prior(&self) -> &Belief;
    /// Points where the measure of uncertainty is known to be kinked.
    fn kinks(&self) -> &[Belief];
    /// Lower bound applied to every free coordinate (used by costs whose
    /// subdifferential is empty on the boundary).
    fn grid_floor(&self) -> Option<f64> {
        None
    }
}

/// A finite set of beliefs in the domain, sorted lexicographically by chart
/// coordinates.
///
/// Always contains the prior, every registered kink and every extra knot.
#[derive(Clone, Debug, Serialize)]
pub struct Grid {
    resolution: usize,
    points: Vec<Belief>,
    coords: Vec<Vec<f64>>,
    prior_index: usize,
}

/// Lattice with `resolution` points per chart axis over the bounding box of
/// the domain, intersected with the domain, plus prior, kinks and knots.
pub fn make_grid<S: GridSource + ?Sized>(
    source: &S,
    resolution: usize,
    extra_knots: &[Belief],
) -> Result<Grid> {
    if resolution < 2 {
        return Err(Error::ResolutionTooSmall(resolution));
    }
    let chart = source.chart();
    let domain = source.domain();
    let m = chart.dim();
    let vert_coords: Vec<Vec<f64>> = domain.vertices().iter().map(|v| chart.apply(v)).collect();
    if vert_coords.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for c in &vert_coords {
        for a in 0..m {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    let floor = source.grid_floor();
    let lift = |p: Vec<f64>| -> Vec<f64> {
        match floor {
            None => p,
            Some(f) => {
                let mut q = p;
                for (j, v) in q.iter_mut().enumerate() {
                    if !domain.fixed_zero(j) && *v < f {
                        *v = f;
                    }
                }
                let s: f64 = q.iter().sum();
                q.iter_mut().for_each(|v| *v /= s);
                q
            }
        }
    };

    let mut points: Vec<Belief> = Vec::new();
    let mut coords: Vec<Vec<f64>> = Vec::new();
    let total = resolution.checked_pow(m as u32).unwrap_or(usize::MAX);
    let mut index = vec![0usize; m];
    for _ in 0..total.max(1) {
        let y: Vec<f64> = (0..m)
            .map(|a| {
                if index[a] == resolution - 1 {
                    hi[a]
                } else {
                    lo[a] + (hi[a] - lo[a]) * index[a] as f64 / (resolution - 1) as f64
                }
            })
            .collect();
        let p = chart.invert_raw(&y);
        if domain.contains(&p, TOL_SIMPLEX) {
            let p = lift(Belief::from_rounded(p).into_vec());
            coords.push(chart.apply(&p));
            points.push(Belief::from_rounded(p));
        }
        // odometer
        for a in 0..m {
            index[a] += 1;
            if index[a] < resolution {
                break;
            }
            index[a] = 0;
        }
    }
    if points.is_empty() {
        return Err(Error::InfeasibleGrid);
    }

    let mut specials: Vec<Belief> = vec![source.prior().clone()];
    specials.extend(source.kinks().iter().cloned());
    specials.extend(extra_knots.iter().cloned());
    for s in specials {
        if s.n_states() != chart.n_states() {
            return Err(Error::WrongLength {
                expected: chart.n_states(),
                got: s.n_states(),
            });
        }
        if !domain.contains(s.as_slice(), 1e-10) {
            return Err(Error::OutsideDomain);
        }
        let p = lift(s.into_vec());
        let y = chart.apply(&p);
        let dup = coords
            .iter()
            .any(|c| crate::linalg::max_abs_diff(c, &y) <= TOL_SIMPLEX);
        if !dup {
            coords.push(y);
            points.push(Belief::from_rounded(p));
        }
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        coords[i]
            .iter()
            .zip(&coords[j])
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let points: Vec<Belief> = order.iter().map(|&i| points[i].clone()).collect();
    let coords: Vec<Vec<f64>> = order.iter().map(|&i| coords[i].clone()).collect();
    let prior_chart = chart.apply(&lift(source.prior().as_slice().to_vec()));
    let prior_index = coords
        .iter()
        .position(|c| crate::linalg::max_abs_diff(c, &prior_chart) <= TOL_SIMPLEX)
        .ok_or(Error::InfeasibleGrid)?;
    Ok(Grid {
        resolution,
        points,
        coords,
        prior_index,
    })
}

impl Grid {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Belief] {
        &self.points
    }

    /// Chart coordinates, aligned with [`Grid::points`].
    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn prior_index(&self) -> usize {
        self.prior_index
    }

    /// Rebuild with additional knots.
    pub fn with_knots<S: GridSource + ?Sized>(&self, source: &S, knots: &[Belief]) -> Result<Grid> {
        let mut all: Vec<Belief> = Vec::new();
        // Keep previous off-lattice points by passing every point that is not
        // on the lattice again; simplest is to pass all points.
        all.extend(self.points.iter().cloned());
        all.extend(knots.iter().cloned());
        make_grid(source, self.resolution, &all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beliefs::build_chart;

    struct Plain {
        domain: Domain,
        chart: Chart,
        prior: Belief,
    }

    impl GridSource for Plain {
        fn domain(&self) -> &Domain {
            &self.domain
        }
        fn chart(&self) -> &Chart {
            &self.chart
        }
        fn prior(&self) -> &Belief {
            &self.prior
        }
        fn kinks(&self) -> &[Belief] {
            &[]
        }
    }

    fn plain(n: usize, prior: Belief) -> Plain {
        let domain = Domain::simplex(n);
        let chart = build_chart(&domain).unwrap();
        Plain {
            domain,
            chart,
            prior,
        }
    }

    #[test]
    fn five_point_grid_on_two_states() {
        let src = plain(2, Belief::binary(0.3).unwrap());
        let g = make_grid(&src, 5, &[]).unwrap();
        let ys: Vec<f64> = g.coords().iter().map(|c| c[0]).collect();
        assert_eq!(ys, vec![0.0, 0.25, 0.3, 0.5, 0.75, 1.0]);
        assert_eq!(g.prior_index(), 2);
    }

    #[test]
    fn triangle_lattice_size() {
        let src = plain(3, Belief::uniform(3));
        let g = make_grid(&src, 5, &[]).unwrap();
        // 15 lattice points plus the prior.
        assert_eq!(g.len(), 16);
    }

    #[test]
    fn resolution_must_be_at_least_two() {
        let src = plain(2, Belief::uniform(2));
        assert!(matches!(
            make_grid(&src, 1, &[]),
            Err(Error::ResolutionTooSmall(1))
        ));
    }
}

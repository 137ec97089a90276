//! Measures of uncertainty and the information costs they induce.
//!
//! A [`CostModel`] is a *canonical* measure of uncertainty for a given prior:
//! convex, zero at the prior, nonnegative, with the prior in the relative
//! interior of its domain. [`canonicalize`] produces one from any convex
//! measure by restricting to the face through the prior and subtracting the
//! supporting affine function given by the minimal-norm subgradient. The cost
//! of a posterior distribution is the expectation of the canonical measure.

mod finite;
mod measure;
mod polytope;
mod spec;

pub use finite::{make_finite_psi, FinitePsiModel};
pub use measure::{Measure, QuadraticPiece};
pub use polytope::Polytope;
pub use spec::{
    ComponentSpec, ConstantParams, CostFamily, CostSpec, FiniteParams, KinkedParams, PwqCell,
    PwqParams, QuadraticParams,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beliefs::{build_chart, Belief, Chart, Domain, GridSource, PosteriorDistribution};
use crate::linalg::{dot, mat_t_vec, max_abs_diff};
use crate::{Error, Result, TOL_BARYCENTER};

/// Grid floor used for costs whose subdifferential is empty on the boundary.
pub const ENTROPY_GRID_FLOOR: f64 = 1e-9;
const CONVEXITY_PROBES: usize = 10_000;

/// A canonical measure of uncertainty for a fixed prior, with the chart in
/// which subgradients and hyperplane slopes are expressed.
#[derive(Clone, Debug)]
pub struct CostModel {
    measure: Measure,
    prior: Belief,
    prior_chart: Vec<f64>,
    chart: Chart,
    kinks: Vec<Belief>,
    kinks_exhaustive: bool,
    spec: Option<CostSpec>,
}

/// Build the canonical model named by a specification.
///
/// Unlike [`canonicalize`], a prior on the boundary of the domain is an
/// error here rather than a reason to restrict the domain.
pub fn make_cost(spec: &CostSpec, prior: &Belief) -> Result<CostModel> {
    if let Some(p) = &spec.prior {
        if p.len() != prior.n_states() || max_abs_diff(p, prior.as_slice()) > 1e-12 {
            return Err(Error::InvalidSpec(
                "cost prior differs from the problem prior".into(),
            ));
        }
    }
    let raw = spec::raw_measure(spec.family, &spec.params, prior)?;
    if !raw.domain().contains(prior.as_slice(), 1e-12) {
        return Err(Error::PriorOutsideDomain);
    }
    if !raw.domain().is_relative_interior(prior.as_slice()) {
        return Err(Error::PriorOnDomainBoundary);
    }
    probe_convexity(&raw, CONVEXITY_PROBES)
        .map_err(|why| Error::NonConvexSpec(format!("{} {why}", spec.name())))?;
    let mut model = canonicalize_unchecked(&raw, prior)?;
    model.spec = Some(spec.clone().with_prior(prior));
    Ok(model)
}

/// Canonical form of a convex measure at `prior`.
///
/// 1. the domain is replaced by the smallest face containing the prior;
/// 2. `ψ(p₀)` and the affine function of the minimal-norm subgradient at the
///    prior are subtracted.
pub fn canonicalize(raw: &Measure, prior: &Belief) -> Result<CostModel> {
    if raw.value(prior.as_slice()).is_infinite() {
        return Err(Error::PriorOutsideDomain);
    }
    probe_convexity(raw, CONVEXITY_PROBES).map_err(Error::NonConvexInput)?;
    canonicalize_unchecked(raw, prior)
}

fn canonicalize_unchecked(raw: &Measure, prior: &Belief) -> Result<CostModel> {
    let p0 = prior.as_slice();
    let domain = if raw.domain().is_relative_interior(p0) {
        raw.domain().clone()
    } else {
        raw.domain().face_through(p0)?
    };
    let restricted = raw.restricted_to(domain.clone());
    let chart = build_chart(&domain)?;
    let prior_chart = chart.apply(p0);
    let v0 = restricted.value(p0);
    if !v0.is_finite() {
        return Err(Error::PriorOutsideDomain);
    }
    let sub = chart_subdiff(&restricted, &chart, p0)?;
    let g = sub.min_norm_point()?;
    // ψ̂(p) = ψ(p) - v₀ - g·(A p - A p₀)
    let a_t_g = mat_t_vec(chart.matrix(), &g);
    let canonical = restricted
        .tilted(&a_t_g.iter().map(|v| -v).collect::<Vec<_>>(), p0)
        .shifted(-v0);
    let (kinks, kinks_exhaustive) = locate_kinks(&canonical, &chart);
    Ok(CostModel {
        measure: canonical,
        prior: prior.clone(),
        prior_chart,
        chart,
        kinks,
        kinks_exhaustive,
        spec: None,
    })
}

fn chart_subdiff(measure: &Measure, chart: &Chart, p: &[f64]) -> Result<Polytope> {
    let grads = measure.gradients(p)?;
    let vertices = grads.iter().map(|g| chart.pullback(g)).collect();
    let rays = measure
        .domain()
        .active_normals(p, 1e-12)
        .iter()
        .map(|a| chart.pullback(a))
        .collect();
    Ok(Polytope::new(vertices, rays))
}

/// Declared kinks inside the domain, plus — in one dimension — every cell
/// boundary where the subdifferential is not a singleton. The registry is
/// exhaustive for smooth measures and for one-dimensional domains.
fn locate_kinks(measure: &Measure, chart: &Chart) -> (Vec<Belief>, bool) {
    let domain = measure.domain();
    let mut kinks: Vec<Belief> = measure
        .declared_kinks()
        .iter()
        .filter(|k| domain.contains(k, 1e-10))
        .map(|k| Belief::from_rounded(k.clone()))
        .collect();
    let Some(pieces) = measure.pieces() else {
        return (kinks, true);
    };
    if pieces.len() == 1 && pieces[0].cell.is_empty() {
        return (kinks, true);
    }
    if chart.dim() != 1 {
        return (kinks, false);
    }
    let verts = domain.vertices();
    let (a, b) = (&verts[0], &verts[verts.len() - 1]);
    for pc in pieces {
        for h in &pc.cell {
            // Where does normal·p = offset cross the segment [a, b]?
            let fa = h.slack(a);
            let fb = h.slack(b);
            if (fa - fb).abs() < 1e-15 {
                continue;
            }
            let t = fa / (fa - fb);
            if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                continue;
            }
            let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
            let point = Belief::from_rounded(p);
            if let Ok(g) = measure.gradients(point.as_slice()) {
                let sub: Vec<Vec<f64>> = g.iter().map(|v| chart.pullback(v)).collect();
                let distinct = sub.iter().any(|s| max_abs_diff(s, &sub[0]) > 1e-12);
                if distinct && !kinks.iter().any(|k| k.distance(&point) <= 1e-12) {
                    kinks.push(point);
                }
            }
        }
    }
    (kinks, true)
}

/// Deterministic random beliefs in a domain (Dirichlet mixtures of its
/// vertices).
pub fn sample_domain(domain: &Domain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts = domain.vertices();
    (0..count)
        .map(|_| {
            let w: Vec<f64> = verts
                .iter()
                .map(|_| -rng.gen_range(1e-12f64..1.0).ln())
                .collect();
            let s: f64 = w.iter().sum();
            let mut p = vec![0.0; domain.n_states()];
            for (wi, v) in w.iter().zip(verts) {
                crate::linalg::axpy(&mut p, wi / s, v);
            }
            p
        })
        .collect()
}

fn probe_convexity(measure: &Measure, probes: usize) -> std::result::Result<(), String> {
    let pts = sample_domain(measure.domain(), 2 * probes, 0xC0_4E_C5);
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1FA);
    for pair in pts.chunks(2) {
        let (p, q) = (&pair[0], &pair[1]);
        let alpha: f64 = rng.gen();
        let mid: Vec<f64> = p
            .iter()
            .zip(q)
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        let lhs = measure.value(&mid);
        let rhs = alpha * measure.value(p) + (1.0 - alpha) * measure.value(q);
        if !lhs.is_finite() && rhs.is_finite() {
            return Err(format!("infinite at {mid:?}"));
        }
        if lhs > rhs + 1e-9 * (1.0 + rhs.abs()) {
            return Err(format!("Jensen gap {} at {mid:?}", lhs - rhs));
        }
    }
    Ok(())
}

impl CostModel {
    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn prior(&self) -> &Belief {
        &self.prior
    }

    /// Chart coordinates of the prior.
    pub fn prior_chart(&self) -> &[f64] {
        &self.prior_chart
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn n_states(&self) -> usize {
        self.prior.n_states()
    }

    pub fn spec(&self) -> Option<&CostSpec> {
        self.spec.as_ref()
    }

    /// Name of the family, `"custom"` for models built from a raw measure.
    pub fn family_name(&self) -> &'static str {
        self.spec.as_ref().map_or("custom", CostSpec::name)
    }

    pub fn is_entropy(&self) -> bool {
        self.measure.is_entropy()
    }

    /// Whether the kink registry lists every kink of the measure.
    /// The domain after restriction to the face through the prior.
    pub fn domain(&self) -> &Domain {
        &self.measure.domain
    }

    /// Registered non-differentiability points, in belief space.
    pub fn kinks(&self) -> &[Belief] {
        &self.kinks
    }

    pub fn kinks_exhaustive(&self) -> bool {
        self.kinks_exhaustive
    }

    /// `ψ(p)`; `OutsideDomain` when `p` is not in the domain.
    pub fn psi_value(&self, p: &Belief) -> Result<f64> {
        let v = self.measure.value(p.as_slice());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::OutsideDomain)
        }
    }

    /// `ψ̄(y) = ψ(T⁻¹ y)`, `+∞` outside the domain.
    pub fn psi_chart(&self, y: &[f64]) -> f64 {
        let p = self.chart.invert_raw(y);
        if p.iter().any(|v| *v < -1e-12) {
            return f64::INFINITY;
        }
        self.measure.value(Belief::from_rounded(p).as_slice())
    }

    /// Subdifferential of `ψ̄` at the chart point of `p`.
    pub fn psi_subdiff(&self, p: &Belief) -> Result<Polytope> {
        if p.n_states() != self.n_states() {
            return Err(Error::WrongLength {
                expected: self.n_states(),
                got: p.n_states(),
            });
        }
        chart_subdiff(&self.measure, &self.chart, p.as_slice())
    }

    pub fn psi_subdiff_chart(&self, y: &[f64]) -> Result<Polytope> {
        let p = self.chart.invert(y)?;
        self.psi_subdiff(&p)
    }

    /// `max_y s·y - ψ̄(y)` with a maximizing belief and its chart point.
    pub fn conjugate(&self, s: &[f64]) -> (Belief, Vec<f64>, f64) {
        let u = mat_t_vec(self.chart.matrix(), s);
        let (p, v) = self.measure.conjugate(&u);
        let belief = Belief::from_rounded(p);
        let y = self.chart.apply(belief.as_slice());
        (belief, y, v + dot(s, self.chart.offset()))
    }

    /// Expected measure of uncertainty over the posteriors.
    pub fn cost_of(&self, pi: &PosteriorDistribution) -> Result<f64> {
        let residual = max_abs_diff(pi.prior().as_slice(), self.prior.as_slice());
        if residual >= TOL_BARYCENTER {
            return Err(Error::PriorMismatch { residual });
        }
        let mut total = 0.0;
        for (s, w) in pi.support().iter().zip(pi.probs()) {
            total += w * self.psi_value(s)?;
        }
        Ok(total)
    }

    /// `Σ π ψ - ψ(q)` for a distribution whose barycenter is `q`.
    pub fn uniform_cost(&self, q: &Belief, pi: &PosteriorDistribution) -> Result<f64> {
        let residual = max_abs_diff(&pi.barycenter(), q.as_slice());
        if residual >= TOL_BARYCENTER {
            return Err(Error::PriorMismatch { residual });
        }
        let mut total = -self.psi_value(q)?;
        for (s, w) in pi.support().iter().zip(pi.probs()) {
            total += w * self.psi_value(s)?;
        }
        Ok(total)
    }

    /// The same model expressed in the chart `y' = L y`.
    pub fn with_chart(&self, l: &[Vec<f64>]) -> Result<CostModel> {
        let chart = self.chart.relinearize(l)?;
        let prior_chart = chart.apply(self.prior.as_slice());
        Ok(CostModel {
            chart,
            prior_chart,
            ..self.clone()
        })
    }

    /// `ψ + ξ·(p - p₀)` as a raw measure (before canonicalization).
    pub fn tilted_measure(&self, xi: &[f64]) -> Measure {
        self.measure.tilted(xi, self.prior.as_slice())
    }
}

impl GridSource for CostModel {
    fn domain(&self) -> &Domain {
        self.measure.domain()
    }
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn prior(&self) -> &Belief {
        &self.prior
    }
    fn kinks(&self) -> &[Belief] {
        &self.kinks
    }
    fn grid_floor(&self) -> Option<f64> {
        self.measure.is_entropy().then_some(ENTROPY_GRID_FLOOR)
    }
}

/// Free-function form of [`CostModel::psi_value`].
pub fn psi_value(model: &CostModel, p: &Belief) -> Result<f64> {
    model.psi_value(p)
}

/// Free-function form of [`CostModel::psi_subdiff`].
pub fn psi_subdiff(model: &CostModel, p: &Belief) -> Result<Polytope> {
    model.psi_subdiff(p)
}

/// Free-function form of [`CostModel::cost_of`].
pub fn cost_of(model: &CostModel, pi: &PosteriorDistribution) -> Result<f64> {
    model.cost_of(pi)
}

/// Free-function form of [`CostModel::uniform_cost`].
pub fn uniform_cost(model: &CostModel, q: &Belief, pi: &PosteriorDistribution) -> Result<f64> {
    model.uniform_cost(q, pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> Belief {
        Belief::binary(0.5).unwrap()
    }

    #[test]
    fn kinked_reference_values() {
        let m = make_cost(&CostSpec::kinked_abs_quad(1.0, 1.0, None), &half()).unwrap();
        assert!((m.psi_value(&Belief::binary(0.75).unwrap()).unwrap() - 0.3125).abs() < 1e-15);
        assert!((m.psi_value(&Belief::binary(0.0).unwrap()).unwrap() - 0.75).abs() < 1e-15);
        let s = m.psi_subdiff(&half()).unwrap();
        assert_eq!(s.vertices.len(), 2);
        assert!((s.support(&[1.0]) - 1.0).abs() < 1e-15);
        assert!((s.support(&[-1.0]) - 1.0).abs() < 1e-15);
        let s = m.psi_subdiff(&Belief::binary(0.75).unwrap()).unwrap();
        assert!(s.is_singleton());
        assert!((s.vertices[0][0] - 1.5).abs() < 1e-15);
        assert_eq!(m.kinks.len(), 1);
    }

    #[test]
    fn entropy_is_kl_at_prior() {
        let m = make_cost(&CostSpec::entropy(), &half()).unwrap();
        let v = m.psi_value(&Belief::binary(0.75).unwrap()).unwrap();
        let kl = 0.25 * (0.25f64 / 0.5).ln() + 0.75 * (0.75f64 / 0.5).ln();
        assert!((v - kl).abs() < 1e-15);
        assert!((v - 0.130812).abs() < 1e-6);
    }

    #[test]
    fn boundary_prior_is_rejected() {
        let r = make_cost(&CostSpec::quadratic(1.0), &Belief::binary(0.0).unwrap());
        assert!(matches!(r, Err(Error::PriorOnDomainBoundary)));
    }

    #[test]
    fn negative_weight_is_nonconvex() {
        let r = make_cost(&CostSpec::kinked_abs_quad(-1.0, 1.0, None), &half());
        assert!(matches!(r, Err(Error::NonConvexSpec(_))));
    }

    #[test]
    fn boundary_rays_in_subdifferential() {
        let m = make_cost(&CostSpec::quadratic(1.0), &half()).unwrap();
        let s = m.psi_subdiff(&Belief::binary(0.0).unwrap()).unwrap();
        assert_eq!(s.rays, vec![vec![-1.0]]);
        assert!((s.vertices[0][0] + 1.0).abs() < 1e-15);
    }
}

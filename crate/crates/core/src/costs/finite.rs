use super::spec::{parse_params, raw_measure, CostFamily, CostSpec, FiniteParams};
use super::{canonicalize_unchecked, probe_convexity, Measure};
use crate::beliefs::{build_chart, Belief, Chart, Domain, GridSource, PosteriorDistribution};
use crate::linalg::max_abs_diff;
use crate::{Error, Result, TOL_BARYCENTER};

/// A cost given by a finite family of measures,
/// `c(π) = max_k Σ π ψ_k - max_k ψ_k(p₀)`.
///
/// Components need not be grounded at the prior; the normalizer makes the
/// cost of the uninformative distribution zero.
#[derive(Clone, Debug)]
pub struct FinitePsiModel {
    components: Vec<Measure>,
    prior: Belief,
    chart: Chart,
    normalizer: f64,
    spec: CostSpec,
}

/// Build a finite family from a `finite_max` specification.
///
/// Component types: `entropy` (relative entropy to the prior), `quadratic`
/// (squared distance to the prior), `kinked_abs_quad`, `custom_pwq` (taken
/// as given), `constant`; each plus its `offset`.
pub fn make_finite_psi(spec: &CostSpec, prior: &Belief) -> Result<FinitePsiModel> {
    if spec.family != CostFamily::FiniteMax {
        return Err(Error::UnsupportedCostFamily(spec.name().into()));
    }
    let params: FiniteParams = parse_params(&spec.params)?;
    if params.components.is_empty() {
        return Err(Error::InvalidSpec("finite_max needs components".into()));
    }
    let n = prior.n_states();
    let mut components = Vec::with_capacity(params.components.len());
    for c in &params.components {
        let raw = raw_measure(c.family, &c.params, prior)?;
        let base = if c.family == CostFamily::Entropy {
            canonicalize_unchecked(&raw, prior)?.measure
        } else {
            raw
        };
        probe_convexity(&base, 2_000)
            .map_err(|why| Error::NonConvexSpec(format!("component {why}")))?;
        if base.domain() != &Domain::simplex(n) {
            return Err(Error::InvalidSpec(
                "finite_max components must live on the full simplex".into(),
            ));
        }
        components.push(base.shifted(c.offset));
    }
    let domain = Domain::simplex(n);
    if !domain.is_relative_interior(prior.as_slice()) {
        return Err(Error::PriorOnDomainBoundary);
    }
    let chart = build_chart(&domain)?;
    let normalizer = components
        .iter()
        .map(|m| m.value(prior.as_slice()))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FinitePsiModel {
        components,
        prior: prior.clone(),
        chart,
        normalizer,
        spec: spec.clone().with_prior(prior),
    })
}

impl FinitePsiModel {
    pub fn components(&self) -> &[Measure] {
        &self.components
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn spec(&self) -> &CostSpec {
        &self.spec
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn prior(&self) -> &Belief {
        &self.prior
    }

    /// `ψ_k(p)` for every component.
    pub fn component_values(&self, p: &Belief) -> Vec<f64> {
        self.components
            .iter()
            .map(|m| m.value(p.as_slice()))
            .collect()
    }

    /// `max_k Σ π ψ_k - max_k ψ_k(p₀)`.
    pub fn finite_max_cost(&self, pi: &PosteriorDistribution) -> Result<f64> {
        let residual = max_abs_diff(pi.prior().as_slice(), self.prior.as_slice());
        if residual >= TOL_BARYCENTER {
            return Err(Error::PriorMismatch { residual });
        }
        let best = self
            .components
            .iter()
            .map(|m| pi.expectation(|s| m.value(s.as_slice())))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(best - self.normalizer)
    }
}

impl GridSource for FinitePsiModel {
    fn domain(&self) -> &Domain {
        self.components[0].domain()
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
    fn grid_floor(&self) -> Option<f64> {
        self.components
            .iter()
            .any(Measure::is_entropy)
            .then_some(super::ENTROPY_GRID_FLOOR)
    }
}

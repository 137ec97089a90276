//! Beliefs over a finite state space, Bayes-plausible posterior
//! distributions, and the geometry used to discretize them: polyhedral
//! domains, affine charts and grids.

mod chart;
mod domain;
mod grid;

pub use chart::{build_chart, Chart};
pub use domain::{Domain, Halfspace};
pub use grid::{make_grid, Grid, GridSource};

use serde::{Deserialize, Serialize};

use crate::linalg::{axpy, max_abs_diff};
use crate::{Error, Result, TOL_BARYCENTER, TOL_SIMPLEX};

/// A probability vector over the states.
///
/// Entries are nonnegative and sum to one. Construction clamps negatives of
/// magnitude at most `1e-12` to zero and renormalizes sums within `1e-12`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::WrongLength {
                expected: 1,
                got: 0,
            });
        }
        let mut w = weights;
        for (index, v) in w.iter_mut().enumerate() {
            if !v.is_finite() || *v < -TOL_SIMPLEX {
                return Err(Error::NegativeWeight { index, value: *v });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > TOL_SIMPLEX {
            return Err(Error::SumNotOne { sum });
        }
        if sum != 1.0 {
            w.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(Belief(w))
    }

    /// Two-state belief `(1 - p, p)`; `p` is the probability of the second
    /// state, which is also its chart coordinate.
    pub fn binary(p: f64) -> Result<Self> {
        Belief::new(vec![1.0 - p, p])
    }

    pub fn uniform(n: usize) -> Self {
        Belief(vec![1.0 / n as f64; n])
    }

    /// Point mass on state `i`.
    pub fn vertex(n: usize, i: usize) -> Self {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Belief(w)
    }

    /// Build from a vector that is known to be a belief up to rounding:
    /// negatives are clamped and the sum renormalized without checks.
    pub(crate) fn from_rounded(mut w: Vec<f64>) -> Self {
        for v in w.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if sum > 0.0 && sum != 1.0 {
            w.iter_mut().for_each(|v| *v /= sum);
        }
        Belief(w)
    }

    pub fn n_states(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &Belief) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }

    /// `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &Belief, alpha: f64) -> Belief {
        Belief::from_rounded(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect(),
        )
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Belief::new(v)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Vec<f64> {
        b.0
    }
}

/// A finitely supported distribution over posteriors whose barycenter equals
/// the prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDistribution {
    support: Vec<Belief>,
    probs: Vec<f64>,
    prior: Belief,
}

impl PosteriorDistribution {
    /// Validate and normalize. Support points closer than `1e-12` are merged
    /// with their probabilities summed.
    pub fn new(support: Vec<Belief>, probs: Vec<f64>, prior: Belief) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::BadWeights(format!(
                "{} support points but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        let n = prior.n_states();
        for s in &support {
            if s.n_states() != n {
                return Err(Error::WrongLength {
                    expected: n,
                    got: s.n_states(),
                });
            }
        }
        if probs.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::BadWeights("probabilities must be positive".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TOL_BARYCENTER {
            return Err(Error::BadWeights(format!("probabilities sum to {total}")));
        }
        let mut merged_support: Vec<Belief> = Vec::with_capacity(support.len());
        let mut merged_probs: Vec<f64> = Vec::with_capacity(probs.len());
        for (s, p) in support.into_iter().zip(probs) {
            match merged_support
                .iter()
                .position(|t| t.distance(&s) <= TOL_SIMPLEX)
            {
                Some(k) => merged_probs[k] += p,
                None => {
                    merged_support.push(s);
                    merged_probs.push(p);
                }
            }
        }
        merged_probs.iter_mut().for_each(|p| *p /= total);
        let dist = PosteriorDistribution {
            support: merged_support,
            probs: merged_probs,
            prior,
        };
        let residual = max_abs_diff(&dist.barycenter(), dist.prior.as_slice());
        if residual >= TOL_BARYCENTER {
            return Err(Error::BarycenterMismatch { residual });
        }
        Ok(dist)
    }

    /// The uninformative distribution: the prior with probability one.
    pub fn degenerate(prior: Belief) -> Self {
        PosteriorDistribution {
            support: vec![prior.clone()],
            probs: vec![1.0],
            prior,
        }
    }

    pub fn support(&self) -> &[Belief] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prior(&self) -> &Belief {
        &self.prior
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn barycenter(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.prior.n_states()];
        for (s, p) in self.support.iter().zip(&self.probs) {
            axpy(&mut out, *p, s.as_slice());
        }
        out
    }

    /// `Σ probs · f(support)`.
    pub fn expectation(&self, mut f: impl FnMut(&Belief) -> f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(s, p)| p * f(s))
            .sum()
    }
}

/// Merge groups of support points into their conditional barycenters.
///
/// `groups` must partition the support indices. The result is a garbling of
/// `pi` and is again Bayes plausible for the same prior.
pub fn garble(pi: &PosteriorDistribution, groups: &[Vec<usize>]) -> Result<PosteriorDistribution> {
    let k = pi.len();
    let mut seen = vec![false; k];
    for g in groups {
        if g.is_empty() {
            return Err(Error::BadIndices("empty group".into()));
        }
        for &i in g {
            if i >= k {
                return Err(Error::BadIndices(format!("index {i} out of range")));
            }
            if seen[i] {
                return Err(Error::BadIndices(format!("index {i} repeated")));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::BadIndices(format!("index {i} missing")));
    }
    let n = pi.prior.n_states();
    let mut support = Vec::with_capacity(groups.len());
    let mut probs = Vec::with_capacity(groups.len());
    for g in groups {
        let mass: f64 = g.iter().map(|&i| pi.probs[i]).sum();
        let mut point = vec![0.0; n];
        for &i in g {
            axpy(&mut point, pi.probs[i] / mass, pi.support[i].as_slice());
        }
        support.push(Belief::from_rounded(point));
        probs.push(mass);
    }
    PosteriorDistribution::new(support, probs, pi.prior.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn belief_clamps_tiny_negatives() {
        let b = Belief::new(vec![-1e-13, 1.0 + 1e-13]).unwrap();
        assert_eq!(b.as_slice()[0], 0.0);
        assert!(matches!(
            Belief::new(vec![-1e-6, 1.0 + 1e-6]),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(matches!(
            Belief::new(vec![0.5, 0.6]),
            Err(Error::SumNotOne { .. })
        ));
    }

    #[test]
    fn posterior_checks_barycenter() {
        let prior = Belief::binary(0.5).unwrap();
        let ok = PosteriorDistribution::new(
            vec![Belief::binary(0.0).unwrap(), Belief::binary(1.0).unwrap()],
            vec![0.5, 0.5],
            prior.clone(),
        );
        assert!(ok.is_ok());
        let bad = PosteriorDistribution::new(
            vec![Belief::binary(0.0).unwrap(), Belief::binary(1.0).unwrap()],
            vec![0.4, 0.6],
            prior,
        );
        assert!(matches!(bad, Err(Error::BarycenterMismatch { .. })));
    }

    #[test]
    fn posterior_merges_duplicates() {
        let prior = Belief::binary(0.5).unwrap();
        let pi = PosteriorDistribution::new(
            vec![
                Belief::binary(0.25).unwrap(),
                Belief::binary(0.25).unwrap(),
                Belief::binary(0.75).unwrap(),
            ],
            vec![0.25, 0.25, 0.5],
            prior,
        )
        .unwrap();
        assert_eq!(pi.len(), 2);
        assert!((pi.probs()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn garble_rejects_non_partition() {
        let pi = PosteriorDistribution::degenerate(Belief::uniform(2));
        assert!(matches!(
            garble(&pi, &[vec![0], vec![0]]),
            Err(Error::BadIndices(_))
        ));
        assert!(matches!(garble(&pi, &[]), Err(Error::BadIndices(_))));
    }
}

//! Acts (state-contingent utility vectors) and menus of acts.

use serde::{Deserialize, Serialize};

use crate::beliefs::{Belief, Chart};
use crate::linalg::dot;
use crate::{Error, Result, TOL_SIMPLEX};

/// A state-contingent payoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Act {
    #[serde(default)]
    pub label: String,
    pub utilities: Vec<f64>,
}

impl Act {
    pub fn new(label: impl Into<String>, utilities: Vec<f64>) -> Self {
        Act {
            label: label.into(),
            utilities,
        }
    }

    /// The act paying zero in every state.
    pub fn zero(n: usize) -> Self {
        Act::new("0", vec![0.0; n])
    }

    pub fn expected(&self, p: &Belief) -> f64 {
        dot(&self.utilities, p.as_slice())
    }

    pub(crate) fn same_payoffs(&self, other: &Act) -> bool {
        crate::linalg::max_abs_diff(&self.utilities, &other.utilities) <= TOL_SIMPLEX
    }
}

/// A nonempty finite set of acts; duplicates (within `1e-12`) are dropped,
/// keeping the first occurrence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Act>", into = "Vec<Act>")]
pub struct Menu {
    acts: Vec<Act>,
}

impl Menu {
    pub fn new(acts: Vec<Act>) -> Result<Self> {
        let first = acts.first().ok_or(Error::EmptyMenu)?;
        let n = first.utilities.len();
        let mut kept: Vec<Act> = Vec::with_capacity(acts.len());
        for a in acts {
            if a.utilities.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: a.utilities.len(),
                });
            }
            if a.utilities.iter().any(|u| !u.is_finite()) {
                return Err(Error::InvalidSpec("non-finite utility".into()));
            }
            if !kept.iter().any(|k| k.same_payoffs(&a)) {
                kept.push(a);
            }
        }
        Ok(Menu { acts: kept })
    }

    pub fn singleton(act: Act) -> Self {
        Menu { acts: vec![act] }
    }

    pub fn acts(&self) -> &[Act] {
        &self.acts
    }

    pub fn len(&self) -> usize {
        self.acts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.acts.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.acts[0].utilities.len()
    }

    pub fn contains(&self, act: &Act) -> bool {
        self.acts.iter().any(|a| a.same_payoffs(act))
    }

    /// Chart slopes and intercepts of every act (`y ↦ α·y + β`).
    pub fn affine_forms(&self, chart: &Chart) -> Vec<(Vec<f64>, f64)> {
        self.acts
            .iter()
            .map(|a| chart.affine_of(&a.utilities))
            .collect()
    }
}

impl TryFrom<Vec<Act>> for Menu {
    type Error = Error;
    fn try_from(v: Vec<Act>) -> Result<Self> {
        Menu::new(v)
    }
}

impl From<Menu> for Vec<Act> {
    fn from(m: Menu) -> Vec<Act> {
        m.acts
    }
}

/// Best expected utility of the menu at `p`, with every maximizing act index
/// (ties within `1e-12`).
pub fn menu_phi(menu: &Menu, p: &Belief) -> (f64, Vec<usize>) {
    let values: Vec<f64> = menu.acts.iter().map(|a| a.expected(p)).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax = values
        .iter()
        .enumerate()
        .filter(|(_, v)| best - **v <= TOL_SIMPLEX)
        .map(|(i, _)| i)
        .collect();
    (best, argmax)
}

pub fn menu_union(f: &Menu, g: &Menu) -> Menu {
    let mut acts = f.acts.clone();
    acts.extend(g.acts.iter().cloned());
    Menu::new(acts).expect("union of nonempty menus")
}

/// Acts of `f` that also belong to `g`; `None` when there are none.
pub fn menu_intersection(f: &Menu, g: &Menu) -> Option<Menu> {
    let acts: Vec<Act> = f.acts.iter().filter(|a| g.contains(a)).cloned().collect();
    Menu::new(acts).ok()
}

/// Pointwise mixture `{α f + (1 - α) g : f ∈ F, g ∈ G}`.
pub fn menu_mix(f: &Menu, g: &Menu, alpha: f64) -> Result<Menu> {
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let mut acts = Vec::with_capacity(f.len() * g.len());
    for a in &f.acts {
        for b in &g.acts {
            let u = a
                .utilities
                .iter()
                .zip(&b.utilities)
                .map(|(x, y)| alpha * x + (1.0 - alpha) * y)
                .collect();
            acts.push(Act::new(
                format!("{}*{}+{}*{}", alpha, a.label, 1.0 - alpha, b.label),
                u,
            ));
        }
    }
    Menu::new(acts)
}

/// Translate every act by `h`.
pub fn menu_translate(f: &Menu, h: &Act) -> Menu {
    let acts = f
        .acts
        .iter()
        .map(|a| {
            Act::new(
                a.label.clone(),
                a.utilities
                    .iter()
                    .zip(&h.utilities)
                    .map(|(x, y)| x + y)
                    .collect(),
            )
        })
        .collect();
    Menu::new(acts).expect("translate keeps the menu nonempty")
}

/// The act whose expected utility at `p` equals the affine function
/// `slope · (T(p) - anchor) + level` on the whole simplex.
///
/// Since beliefs sum to one, `u = Aᵀ slope + (slope · (c - anchor) + level) 1`
/// where `T(p) = A p + c`.
pub fn act_from_affine(chart: &Chart, slope: &[f64], anchor: &[f64], level: f64) -> Act {
    let a = chart.matrix();
    let c = chart.offset();
    let shift = dot(slope, &crate::linalg::sub(c, anchor)) + level;
    let n = chart.n_states();
    let mut u = vec![shift; n];
    for (row, s) in a.iter().zip(slope) {
        for j in 0..n {
            u[j] += s * row[j];
        }
    }
    Act::new("affine", u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beliefs::{build_chart, Domain};

    #[test]
    fn act_from_affine_reproduces_reference_acts() {
        let chart = build_chart(&Domain::simplex(2)).unwrap();
        let a = act_from_affine(&chart, &[2.5], &[0.525], 0.0);
        assert!((a.utilities[0] + 1.3125).abs() < 1e-15);
        assert!((a.utilities[1] - 1.1875).abs() < 1e-15);
        let h = act_from_affine(&chart, &[-1.0], &[0.5], 0.0);
        assert_eq!(h.utilities, vec![0.5, -0.5]);
    }

    #[test]
    fn menus_drop_duplicates_and_reject_empty() {
        let m = Menu::new(vec![Act::zero(2), Act::zero(2)]).unwrap();
        assert_eq!(m.len(), 1);
        assert!(matches!(Menu::new(vec![]), Err(Error::EmptyMenu)));
    }

    #[test]
    fn mixing_weight_is_checked() {
        let m = Menu::singleton(Act::zero(2));
        assert!(matches!(
            menu_mix(&m, &m, 1.5),
            Err(Error::AlphaOutOfRange(_))
        ));
    }

    #[test]
    fn intersection_can_be_empty() {
        let f = Menu::singleton(Act::new("a", vec![1.0, 0.0]));
        let g = Menu::singleton(Act::new("b", vec![0.0, 1.0]));
        assert!(menu_intersection(&f, &g).is_none());
    }
}

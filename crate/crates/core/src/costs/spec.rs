use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::measure::{Measure, QuadraticPiece};
use crate::beliefs::{Belief, Domain, Halfspace};
use crate::{Error, Result};

/// Cost families that can be named in a specification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFamily {
    /// Expected reduction in Shannon entropy (mutual information).
    Entropy,
    /// `scale · ‖x - x₀‖²` in simplex coordinates.
    Quadratic,
    /// Two states: `weight · |x - k| + quad · (x - k)²`.
    KinkedAbsQuad,
    /// User-supplied continuous convex piecewise quadratic.
    CustomPwq,
    /// Pointwise maximum over a finite family of measures.
    FiniteMax,
    /// A constant function (only meaningful inside `finite_max`).
    Constant,
}

/// `{type, params, prior}` as it appears in problem files.
///
/// "Simplex coordinates" below means `x = (p(ω₂), …, p(ωₙ))`, the chart of
/// the full simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    #[serde(rename = "type")]
    pub family: CostFamily,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticParams {
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinkedParams {
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default = "one")]
    pub quad: f64,
    /// Kink location as the probability of the second state; defaults to the
    /// prior.
    #[serde(default)]
    pub kink: Option<f64>,
}

/// One piece `xᵀQx + l·x + c` on `{x : normal·x ≤ offset for each constraint}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PwqCell {
    #[serde(default)]
    pub quad: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub linear: Option<Vec<f64>>,
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub constraints: Vec<Halfspace>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PwqParams {
    pub cells: Vec<PwqCell>,
    /// Known kink locations, as beliefs.
    #[serde(default)]
    pub kinks: Vec<Vec<f64>>,
    /// Extra domain constraints in simplex coordinates.
    #[serde(default)]
    pub domain: Vec<Halfspace>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantParams {
    #[serde(default)]
    pub value: f64,
}

/// A component of a finite family: a measure plus an additive offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    #[serde(rename = "type")]
    pub family: CostFamily,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteParams {
    pub components: Vec<ComponentSpec>,
}

fn one() -> f64 {
    1.0
}

impl CostSpec {
    pub fn new(family: CostFamily, params: Value) -> Self {
        CostSpec {
            family,
            params,
            prior: None,
        }
    }

    pub fn entropy() -> Self {
        CostSpec::new(CostFamily::Entropy, Value::Null)
    }

    pub fn quadratic(scale: f64) -> Self {
        CostSpec::new(CostFamily::Quadratic, serde_json::json!({ "scale": scale }))
    }

    pub fn kinked_abs_quad(weight: f64, quad: f64, kink: Option<f64>) -> Self {
        let mut params = serde_json::json!({ "weight": weight, "quad": quad });
        if let Some(k) = kink {
            params["kink"] = serde_json::json!(k);
        }
        CostSpec::new(CostFamily::KinkedAbsQuad, params)
    }

    pub fn custom_pwq(params: &PwqParams) -> Self {
        CostSpec::new(
            CostFamily::CustomPwq,
            serde_json::to_value(params).expect("serializable"),
        )
    }

    pub fn with_prior(mut self, prior: &Belief) -> Self {
        self.prior = Some(prior.as_slice().to_vec());
        self
    }

    pub fn name(&self) -> &'static str {
        family_name(self.family)
    }
}

pub(crate) fn family_name(f: CostFamily) -> &'static str {
    match f {
        CostFamily::Entropy => "entropy",
        CostFamily::Quadratic => "quadratic",
        CostFamily::KinkedAbsQuad => "kinked_abs_quad",
        CostFamily::CustomPwq => "custom_pwq",
        CostFamily::FiniteMax => "finite_max",
        CostFamily::Constant => "constant",
    }
}

pub(crate) fn parse_params<T: for<'de> Deserialize<'de>>(params: &Value) -> Result<T> {
    let v = if params.is_null() {
        Value::Object(Default::default())
    } else {
        params.clone()
    };
    serde_json::from_value(v).map_err(|e| Error::InvalidSpec(e.to_string()))
}

/// Map simplex-coordinate data onto belief coordinates (`x = p[1..]`).
fn lift_vector(x: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(x.iter().copied()).collect()
}

fn lift_matrix(q: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]; n];
    for i in 1..n {
        for j in 1..n {
            out[i][j] = 0.5 * (q[i - 1][j - 1] + q[j - 1][i - 1]);
        }
    }
    out
}

fn lift_halfspace(h: &Halfspace, n: usize) -> Result<Halfspace> {
    if h.normal.len() != n - 1 {
        return Err(Error::InvalidSpec(format!(
            "constraint normal has length {}, expected {}",
            h.normal.len(),
            n - 1
        )));
    }
    Ok(Halfspace {
        normal: lift_vector(&h.normal),
        offset: h.offset,
    })
}

fn quadratic_piece_x(
    n: usize,
    q: Vec<Vec<f64>>,
    l: Vec<f64>,
    c: f64,
    cell: Vec<Halfspace>,
) -> QuadraticPiece {
    QuadraticPiece {
        q: lift_matrix(&q, n),
        b: lift_vector(&l),
        c,
        cell,
    }
}

/// The uncanonicalized measure described by a specification.
pub(crate) fn raw_measure(family: CostFamily, params: &Value, prior: &Belief) -> Result<Measure> {
    let n = prior.n_states();
    if n < 2 {
        return Err(Error::InvalidSpec("need at least two states".into()));
    }
    let x0: Vec<f64> = prior.as_slice()[1..].to_vec();
    match family {
        CostFamily::Entropy => {
            let _: serde_json::Map<String, Value> = parse_params(params)?;
            Ok(Measure::negative_entropy(n))
        }
        CostFamily::Quadratic => {
            let p: QuadraticParams = parse_params(params)?;
            if !(p.scale >= 0.0) || !p.scale.is_finite() {
                return Err(Error::NonConvexSpec(format!(
                    "scale {} must be ≥ 0",
                    p.scale
                )));
            }
            let m = n - 1;
            let q: Vec<Vec<f64>> = (0..m)
                .map(|i| (0..m).map(|j| if i == j { p.scale } else { 0.0 }).collect())
                .collect();
            let l: Vec<f64> = x0.iter().map(|v| -2.0 * p.scale * v).collect();
            let c = p.scale * x0.iter().map(|v| v * v).sum::<f64>();
            Measure::piecewise_quadratic(
                Domain::simplex(n),
                vec![quadratic_piece_x(n, q, l, c, vec![])],
                vec![],
            )
        }
        CostFamily::KinkedAbsQuad => {
            if n != 2 {
                return Err(Error::NotTwoStates(n));
            }
            let p: KinkedParams = parse_params(params)?;
            let k = p.kink.unwrap_or(x0[0]);
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::InvalidSpec(format!("kink {k} outside [0, 1]")));
            }
            if !(p.weight >= 0.0) || !(p.quad >= 0.0) {
                return Err(Error::NonConvexSpec(
                    "weight and quad must be nonnegative".into(),
                ));
            }
            let (w, a) = (p.weight, p.quad);
            // left: w (k - x) + a (x - k)²; right: w (x - k) + a (x - k)².
            let left = quadratic_piece_x(
                n,
                vec![vec![a]],
                vec![-w - 2.0 * a * k],
                w * k + a * k * k,
                vec![Halfspace {
                    normal: vec![0.0, 1.0],
                    offset: k,
                }],
            );
            let right = quadratic_piece_x(
                n,
                vec![vec![a]],
                vec![w - 2.0 * a * k],
                -w * k + a * k * k,
                vec![Halfspace {
                    normal: vec![0.0, -1.0],
                    offset: -k,
                }],
            );
            let kinks = if w > 0.0 {
                vec![vec![1.0 - k, k]]
            } else {
                vec![]
            };
            Measure::piecewise_quadratic(Domain::simplex(2), vec![left, right], kinks)
        }
        CostFamily::CustomPwq => {
            let p: PwqParams = parse_params(params)?;
            custom_measure(&p, n)
        }
        CostFamily::Constant => {
            let p: ConstantParams = parse_params(params)?;
            let piece = QuadraticPiece {
                q: vec![vec![0.0; n]; n],
                b: vec![0.0; n],
                c: p.value,
                cell: vec![],
            };
            Measure::piecewise_quadratic(Domain::simplex(n), vec![piece], vec![])
        }
        CostFamily::FiniteMax => Err(Error::UnsupportedCostFamily(
            "finite_max is a family of measures, not a single one".into(),
        )),
    }
}

fn custom_measure(p: &PwqParams, n: usize) -> Result<Measure> {
    let m = n - 1;
    let extra = p
        .domain
        .iter()
        .map(|h| lift_halfspace(h, n))
        .collect::<Result<Vec<_>>>()?;
    let domain = Domain::new(n, extra)?;
    let mut pieces = Vec::with_capacity(p.cells.len());
    for cell in &p.cells {
        let q = cell.quad.clone().unwrap_or_else(|| vec![vec![0.0; m]; m]);
        let l = cell.linear.clone().unwrap_or_else(|| vec![0.0; m]);
        if q.len() != m || q.iter().any(|r| r.len() != m) || l.len() != m {
            return Err(Error::InvalidSpec(format!(
                "cell data must be in {m} simplex coordinates"
            )));
        }
        let constraints = cell
            .constraints
            .iter()
            .map(|h| lift_halfspace(h, n))
            .collect::<Result<Vec<_>>>()?;
        pieces.push(quadratic_piece_x(n, q, l, cell.constant, constraints));
    }
    for k in &p.kinks {
        let b = Belief::new(k.clone())?;
        if b.n_states() != n || !domain.contains(b.as_slice(), 1e-10) {
            return Err(Error::InvalidSpec(
                "declared kink outside the domain".into(),
            ));
        }
    }
    let measure = Measure::piecewise_quadratic(domain, pieces, p.kinks.clone())?;
    check_pieces(&measure)?;
    Ok(measure)
}

/// Coverage and continuity of a piecewise quadratic: every vertex of every
/// cell (intersected with the domain) and every midpoint of such vertices
/// must get the same value from all cells containing it, and every vertex of
/// the domain must be covered.
fn check_pieces(measure: &Measure) -> Result<()> {
    let pieces = measure.pieces().expect("piecewise quadratic");
    let domain = measure.domain();
    let n = domain.n_states();
    let mut probes: Vec<Vec<f64>> = domain.vertices().to_vec();
    for pc in pieces {
        let mut extra: Vec<Halfspace> = domain.inequalities()[n..].to_vec();
        extra.extend(pc.cell.iter().cloned());
        if let Ok(cell_dom) = Domain::new(n, extra) {
            let vs = cell_dom.vertices();
            for (i, a) in vs.iter().enumerate() {
                probes.push(a.clone());
                for b in &vs[i + 1..] {
                    probes.push(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect());
                }
            }
        }
    }
    for p in &probes {
        let values: Vec<f64> = pieces
            .iter()
            .filter(|pc| pc.contains(p, 1e-10))
            .map(|pc| pc.value(p))
            .collect();
        if values.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "cells do not cover the domain at {p:?}"
            )));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > 1e-9 * (1.0 + hi.abs()) {
            return Err(Error::InvalidSpec(format!("pieces disagree at {p:?}")));
        }
    }
    Ok(())
}

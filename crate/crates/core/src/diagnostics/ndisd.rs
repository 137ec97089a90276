use serde::{Deserialize, Serialize};

use crate::beliefs::Belief;
use crate::costs::{sample_domain, CostModel, Polytope};
use crate::linalg::{axpy, dot, invert, mat_vec, max_abs_diff, norm, null_space, sub, transpose};
use crate::lp::{LpOutcome, StandardLp};
use crate::solver::{probe_directions, DEFAULT_PROBE_SEED};
use crate::{Error, Result};

/// Which displacement a certificate's `δ` must be orthogonal to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DSetConvention {
    /// `δ · (p̄ᵢ - p̄₀) = 0`.
    #[default]
    DisplacementFromPrior,
    /// `δ · p̄ᵢ = 0` (chart coordinates taken from the chart origin).
    ChartOrigin,
}

/// Evidence that a measure is not jointly directionally differentiable:
/// points whose hull contains the prior and slopes `λᵢ` such that `λᵢ` and
/// `λᵢ + δ` are both subgradients at `p̄ᵢ`, with `δ ≠ 0` orthogonal to every
/// displacement `p̄ᵢ - p̄₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NdisdCertificate {
    pub points: Vec<Belief>,
    pub points_chart: Vec<Vec<f64>>,
    pub lambdas: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    /// Convex weights on `points` reproducing the prior.
    pub prior_in_hull_weights: Vec<f64>,
}

const BOX: f64 = 1e6;
const DELTA_TOL: f64 = 1e-8;

fn displacement(model: &CostModel, y: &[f64], convention: DSetConvention) -> Vec<f64> {
    match convention {
        DSetConvention::DisplacementFromPrior => sub(y, model.prior_chart()),
        DSetConvention::ChartOrigin => y.to_vec(),
    }
}

fn dedup_points(points: &[Belief]) -> Vec<Belief> {
    let mut out: Vec<Belief> = Vec::new();
    for p in points {
        if !out.iter().any(|q| q.distance(p) <= 1e-12) {
            out.push(p.clone());
        }
    }
    out
}

/// Convex weights reproducing the prior from the points.
fn hull_weights(model: &CostModel, ys: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = model.dim();
    let mut lp = StandardLp::new(m + 1);
    lp.rhs[m] = 1.0;
    for y in ys {
        let mut col = sub(y, model.prior_chart());
        col.push(1.0);
        lp.push_column(col, 0.0);
    }
    match lp.maximize() {
        LpOutcome::Optimal(s) => Ok(s.x),
        _ => Err(Error::PriorNotInHull),
    }
}

/// LP over subgradient pairs: maximize `d·δ` subject to `λᵢ, λᵢ + δ ∈ ∂ψ̄(p̄ᵢ)`
/// and `δ·uᵢ = 0`. Returns `(objective, δ, λᵢ)`.
struct PairLp {
    subs: Vec<Polytope>,
    us: Vec<Vec<f64>>,
    m: usize,
    boxed: bool,
}

impl PairLp {
    fn new(subs: Vec<Polytope>, us: Vec<Vec<f64>>, m: usize) -> Self {
        let boxed = subs.iter().any(|s| !s.rays.is_empty());
        PairLp { subs, us, m, boxed }
    }

    fn solve(&self, d: &[f64]) -> Result<Option<(f64, Vec<f64>, Vec<Vec<f64>>)>> {
        let m = self.m;
        let k = self.subs.len();
        // rows: per point 2 (convexity) + m (pair link) + 1 (orthogonality)
        let rows_per = 2 + m + 1;
        let box_rows = if self.boxed { 2 * m } else { 0 };
        let rows = k * rows_per + box_rows;
        let mut lp = StandardLp::new(rows);
        // Column bookkeeping: (point, is_nu, is_ray, generator index)
        let mut tags: Vec<(usize, bool, bool, usize)> = Vec::new();
        for (i, s) in self.subs.iter().enumerate() {
            let base = i * rows_per;
            lp.rhs[base] = 1.0;
            lp.rhs[base + 1] = 1.0;
            for nu in [false, true] {
                let sign = if nu { 1.0 } else { -1.0 };
                for (g, v) in s.vertices.iter().enumerate() {
                    let mut col = vec![0.0; rows];
                    col[base + usize::from(nu)] = 1.0;
                    for a in 0..m {
                        col[base + 2 + a] = sign * v[a];
                    }
                    lp.push_column(col, 0.0);
                    tags.push((i, nu, false, g));
                }
                for (g, r) in s.rays.iter().enumerate() {
                    let mut col = vec![0.0; rows];
                    for a in 0..m {
                        col[base + 2 + a] = sign * r[a];
                    }
                    lp.push_column(col, 0.0);
                    tags.push((i, nu, true, g));
                }
            }
        }
        // δ = δ⁺ - δ⁻
        let delta_start = lp.columns.len();
        for sign in [1.0, -1.0] {
            for a in 0..m {
                let mut col = vec![0.0; rows];
                for (i, u) in self.us.iter().enumerate() {
                    let base = i * rows_per;
                    col[base + 2 + a] = -sign;
                    col[base + 2 + m] = sign * u[a];
                }
                if self.boxed {
                    col[k * rows_per + a + if sign > 0.0 { 0 } else { m }] = 1.0;
                }
                lp.push_column(col, sign * d[a]);
            }
        }
        if self.boxed {
            for r in 0..2 * m {
                lp.rhs[k * rows_per + r] = BOX;
                let mut col = vec![0.0; rows];
                col[k * rows_per + r] = 1.0;
                lp.push_column(col, 0.0);
            }
        }
        let sol = match lp.maximize() {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return Err(Error::Unbounded),
        };
        let delta: Vec<f64> = (0..m)
            .map(|a| sol.x[delta_start + a] - sol.x[delta_start + m + a])
            .collect();
        let mut lambdas = vec![vec![0.0; m]; k];
        for (x, &(i, nu, ray, g)) in sol.x.iter().zip(&tags) {
            if nu || *x == 0.0 {
                continue;
            }
            let gen = if ray {
                &self.subs[i].rays[g]
            } else {
                &self.subs[i].vertices[g]
            };
            axpy(&mut lambdas[i], *x, gen);
        }
        Ok(Some((sol.objective, delta, lambdas)))
    }
}

/// Search for a non-differentiability certificate on the given points.
pub fn ndisd_probe(model: &CostModel, points: &[Belief]) -> Result<Option<NdisdCertificate>> {
    ndisd_probe_with(model, points, DSetConvention::default())
}

pub fn ndisd_probe_with(
    model: &CostModel,
    points: &[Belief],
    convention: DSetConvention,
) -> Result<Option<NdisdCertificate>> {
    let points = dedup_points(points);
    if points.is_empty() {
        return Err(Error::PriorNotInHull);
    }
    let chart = model.chart();
    let ys: Vec<Vec<f64>> = points.iter().map(|p| chart.apply(p.as_slice())).collect();
    let weights = hull_weights(model, &ys)?;
    let subs = points
        .iter()
        .map(|p| model.psi_subdiff(p))
        .collect::<Result<Vec<_>>>()?;
    let us: Vec<Vec<f64>> = ys
        .iter()
        .map(|y| displacement(model, y, convention))
        .collect();
    let m = model.dim();
    let lp = PairLp::new(subs, us, m);
    let mut best: Option<(f64, Vec<f64>, Vec<Vec<f64>>)> = None;
    for d in probe_directions(m, DEFAULT_PROBE_SEED) {
        if let Some((obj, delta, lambdas)) = lp.solve(&d)? {
            let larger = best
                .as_ref()
                .is_none_or(|(_, b, _)| norm(&delta) > norm(b) + 1e-12);
            if obj > DELTA_TOL && larger {
                best = Some((obj, delta, lambdas));
            }
        }
    }
    Ok(best.map(|(obj, mut delta, lambdas)| {
        if obj >= 0.5 * BOX {
            // Unbounded along rays: any positive multiple of δ up to the LP
            // solution is still a certificate by convexity.
            let nd = norm(&delta);
            delta.iter_mut().for_each(|v| *v /= nd);
        }
        NdisdCertificate {
            points,
            points_chart: ys,
            lambdas,
            delta,
            prior_in_hull_weights: weights,
        }
    }))
}

impl NdisdCertificate {
    /// Re-check every defining property directly against the model.
    pub fn validate(&self, model: &CostModel) -> Result<()> {
        self.validate_with(model, DSetConvention::default())
    }

    pub fn validate_with(&self, model: &CostModel, convention: DSetConvention) -> Result<()> {
        let bad = |why: String| Err(Error::CertificateInvalid(why));
        if norm(&self.delta) <= DELTA_TOL {
            return bad("delta is zero".into());
        }
        let chart = model.chart();
        let mut bary = vec![0.0; model.dim()];
        for (w, p) in self.prior_in_hull_weights.iter().zip(&self.points) {
            if *w < -1e-12 {
                return bad("negative hull weight".into());
            }
            axpy(&mut bary, *w, &chart.apply(p.as_slice()));
        }
        let wsum: f64 = self.prior_in_hull_weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-10 || max_abs_diff(&bary, model.prior_chart()) > 1e-10 {
            return bad("hull weights do not reproduce the prior".into());
        }
        let mut probes = sample_domain(model.domain(), 100, 0x5AB6);
        probes.extend(self.points.iter().map(|p| p.as_slice().to_vec()));
        probes.extend(model.domain().vertices().iter().cloned());
        let dn = 1.0 + norm(&self.delta);
        for ((p, lam), y) in self
            .points
            .iter()
            .zip(&self.lambdas)
            .zip(&self.points_chart)
        {
            let u = displacement(model, y, convention);
            if dot(&self.delta, &u).abs() > 1e-10 * dn {
                return bad(format!("delta not orthogonal at {:?}", p.as_slice()));
            }
            let psi_p = model.psi_value(p)?;
            let shifted: Vec<f64> = lam.iter().zip(&self.delta).map(|(a, b)| a + b).collect();
            for g in [lam, &shifted] {
                for z in &probes {
                    let zb = Belief::from_rounded(z.clone());
                    let Ok(psi_z) = model.psi_value(&zb) else {
                        continue;
                    };
                    let yz = chart.apply(zb.as_slice());
                    let rhs = psi_p + dot(g, &sub(&yz, y));
                    if psi_z < rhs - 1e-9 * (1.0 + rhs.abs()) {
                        return bad(format!(
                            "slope {g:?} is not a subgradient at {:?}",
                            p.as_slice()
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// The certificate in the chart `y' = L y`: points map by `L`, slopes by
    /// `L⁻ᵀ`.
    pub fn transform(&self, l: &[Vec<f64>]) -> Result<NdisdCertificate> {
        let m = l.len();
        let l_inv = invert(l).ok_or_else(|| Error::InvalidSpec("singular chart map".into()))?;
        let l_inv_t = transpose(&l_inv, m);
        Ok(NdisdCertificate {
            points: self.points.clone(),
            points_chart: self.points_chart.iter().map(|y| mat_vec(l, y)).collect(),
            lambdas: self.lambdas.iter().map(|g| mat_vec(&l_inv_t, g)).collect(),
            delta: mat_vec(&l_inv_t, &self.delta),
            prior_in_hull_weights: self.prior_in_hull_weights.clone(),
        })
    }
}

/// The set `D` of admissible certificate directions for a set of points.
#[derive(Clone, Debug, Serialize)]
pub struct DSet {
    /// Vertices (for a segment, its two ends; a single point for `{0}`).
    pub vertices: Vec<Vec<f64>>,
    /// Dimension of the subspace orthogonal to all displacements.
    pub subspace_rank: usize,
    /// False when the vertices come from support sampling only.
    pub complete: bool,
}

pub fn d_set(model: &CostModel, points: &[Belief]) -> Result<DSet> {
    d_set_with(model, points, DSetConvention::default())
}

/// `D = {δ : ∃ λᵢ with λᵢ, λᵢ + δ ∈ ∂ψ̄(p̄ᵢ), δ·uᵢ = 0}`.
///
/// Exact when the orthogonal subspace has rank 0 or 1, and in the plane when
/// all points coincide with the prior (a polygon of pairwise vertex
/// differences intersected across points). Otherwise vertices are sampled
/// from the support function and `complete` is false.
pub fn d_set_with(
    model: &CostModel,
    points: &[Belief],
    convention: DSetConvention,
) -> Result<DSet> {
    let points = dedup_points(points);
    let chart = model.chart();
    let ys: Vec<Vec<f64>> = points.iter().map(|p| chart.apply(p.as_slice())).collect();
    hull_weights(model, &ys)?;
    let subs = points
        .iter()
        .map(|p| model.psi_subdiff(p))
        .collect::<Result<Vec<_>>>()?;
    let us: Vec<Vec<f64>> = ys
        .iter()
        .map(|y| displacement(model, y, convention))
        .collect();
    let m = model.dim();
    let rows: Vec<Vec<f64>> = us.iter().filter(|u| norm(u) > 1e-12).cloned().collect();
    let basis = null_space(&rows, m, 1e-10);
    let r = basis.len();
    if r == 0 {
        return Ok(DSet {
            vertices: vec![vec![0.0; m]],
            subspace_rank: 0,
            complete: true,
        });
    }
    let all_bounded = subs.iter().all(Polytope::is_bounded);
    if r == 2 && m == 2 && rows.is_empty() && all_bounded {
        let mut poly: Option<Vec<[f64; 2]>> = None;
        for s in &subs {
            let mut diffs = Vec::new();
            for a in &s.vertices {
                for b in &s.vertices {
                    diffs.push((a[0] - b[0], a[1] - b[1]));
                }
            }
            let hull = convex_hull(&diffs);
            poly = Some(match poly {
                None => hull,
                Some(p) => clip(&p, &hull),
            });
        }
        let vertices = poly
            .unwrap_or_default()
            .into_iter()
            .map(|v| v.to_vec())
            .collect::<Vec<_>>();
        return Ok(DSet {
            vertices: if vertices.is_empty() {
                vec![vec![0.0; 2]]
            } else {
                vertices
            },
            subspace_rank: 2,
            complete: true,
        });
    }
    let lp = PairLp::new(subs, us, m);
    let support = |d: &[f64]| -> Result<Vec<f64>> {
        match lp.solve(d)? {
            Some((obj, delta, _)) if obj < 0.5 * BOX => Ok(delta),
            Some(_) => Err(Error::Unbounded),
            None => Ok(vec![0.0; m]),
        }
    };
    if r == 1 {
        let e = &basis[0];
        let hi = support(e)?;
        let lo = support(&e.iter().map(|v| -v).collect::<Vec<_>>())?;
        let mut vertices = vec![lo.clone()];
        if max_abs_diff(&lo, &hi) > 1e-12 {
            vertices.push(hi);
        }
        return Ok(DSet {
            vertices,
            subspace_rank: 1,
            complete: true,
        });
    }
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut dirs = Vec::new();
    for b in &basis {
        dirs.push(b.clone());
        dirs.push(b.iter().map(|v| -v).collect());
    }
    for d in probe_directions(r, DEFAULT_PROBE_SEED ^ 0xD5E7)
        .into_iter()
        .skip(2 * r)
    {
        let mut full = vec![0.0; m];
        for (c, b) in d.iter().zip(&basis) {
            axpy(&mut full, *c, b);
        }
        dirs.push(full);
    }
    for d in dirs {
        let v = support(&d)?;
        if !vertices.iter().any(|w| max_abs_diff(w, &v) <= 1e-10) {
            vertices.push(v);
        }
    }
    Ok(DSet {
        vertices,
        subspace_rank: r,
        complete: false,
    })
}

fn convex_hull(points: &[(f64, f64)]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-14 && (a.1 - b.1).abs() <= 1e-14);
    if pts.len() <= 2 {
        return pts.into_iter().map(|(x, y)| [x, y]).collect();
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-15
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-15
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|(x, y)| [x, y]).collect()
}

/// Intersection of two convex polygons (counter-clockwise vertex lists).
fn clip(subject: &[[f64; 2]], clipper: &[[f64; 2]]) -> Vec<[f64; 2]> {
    if clipper.len() < 3 || subject.len() < 3 {
        // Degenerate (segment or point): keep subject vertices inside both.
        return subject
            .iter()
            .filter(|p| {
                clipper
                    .iter()
                    .any(|q| (p[0] - q[0]).abs() + (p[1] - q[1]).abs() <= 1e-12)
            })
            .copied()
            .collect();
    }
    let mut output = subject.to_vec();
    for i in 0..clipper.len() {
        let a = clipper[i];
        let b = clipper[(i + 1) % clipper.len()];
        let inside =
            |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-14;
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let intersect = || {
                let (x1, y1, x2, y2) = (prev[0], prev[1], cur[0], cur[1]);
                let (x3, y3, x4, y4) = (a[0], a[1], b[0], b[1]);
                let den = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4);
                let t = ((x1 - x3) * (y3 - y4) - (y1 - y3) * (x3 - x4)) / den;
                [x1 + t * (x2 - x1), y1 + t * (y2 - y1)]
            };
            if inside(cur) {
                if !inside(prev) {
                    output.push(intersect());
                }
                output.push(cur);
            } else if inside(prev) {
                output.push(intersect());
            }
        }
        if output.is_empty() {
            break;
        }
    }
    output
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JddVerdict {
    Satisfied,
    Violated,
    /// No certificate found, but the kink registry is not known to be
    /// exhaustive.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct JddReport {
    pub verdict: JddVerdict,
    pub certificate: Option<NdisdCertificate>,
    pub candidate_sets: usize,
    pub registry_exhaustive: bool,
}

pub fn jdd_check(model: &CostModel) -> Result<JddReport> {
    jdd_check_with(model, &[])
}

/// Probe the prior alone, every registered kink paired with its reflection
/// through the prior, and any extra candidate sets.
pub fn jdd_check_with(model: &CostModel, extra_sets: &[Vec<Belief>]) -> Result<JddReport> {
    let prior = model.prior();
    let mut sets: Vec<Vec<Belief>> = vec![vec![prior.clone()]];
    for k in model.kinks() {
        if k.distance(prior) <= 1e-12 {
            continue;
        }
        if let Some(r) = reflection(model, k) {
            sets.push(vec![k.clone(), r]);
        }
    }
    sets.extend(extra_sets.iter().cloned());
    for set in &sets {
        if let Some(cert) = ndisd_probe(model, set)? {
            return Ok(JddReport {
                verdict: JddVerdict::Violated,
                certificate: Some(cert),
                candidate_sets: sets.len(),
                registry_exhaustive: model.kinks_exhaustive(),
            });
        }
    }
    Ok(JddReport {
        verdict: if model.kinks_exhaustive() {
            JddVerdict::Satisfied
        } else {
            JddVerdict::Inconclusive
        },
        certificate: None,
        candidate_sets: sets.len(),
        registry_exhaustive: model.kinks_exhaustive(),
    })
}

/// `p₀ - t (k - p₀)` with the largest `t ≤ 1` keeping it in the domain.
fn reflection(model: &CostModel, k: &Belief) -> Option<Belief> {
    let p0 = model.prior().as_slice();
    let d = sub(k.as_slice(), p0);
    let domain = model.domain();
    let mut t: f64 = 1.0;
    for h in domain.inequalities() {
        // slack(p₀ - t d) = slack(p₀) + t (a·d) ≥ 0
        let ad = dot(&h.normal, &d);
        if ad < -1e-15 {
            t = t.min(h.slack(p0) / -ad);
        }
    }
    if t <= 1e-12 {
        return None;
    }
    let q: Vec<f64> = p0.iter().zip(&d).map(|(a, b)| a - t * b).collect();
    Some(Belief::from_rounded(q))
}

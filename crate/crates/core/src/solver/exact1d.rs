use super::{GridStats, SolveReport};
use crate::beliefs::{Belief, PosteriorDistribution};
use crate::costs::CostModel;
use crate::linalg::{dot, eval_hull, upper_hull};
use crate::menus::{menu_phi, Menu};
use crate::{Error, Result};

/// A stretch of the chart line on which the net payoff is one concave
/// quadratic `-a y² + b y + c`.
#[derive(Clone, Copy, Debug)]
struct Arc {
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
    c: f64,
}

/// Exact concave envelope of `φ_F - ψ̄` at the prior for two-state models
/// with a piecewise-quadratic measure.
///
/// Candidate hull vertices are the breakpoints (domain ends, cell
/// boundaries, act-switch points, the prior and `knots`), tangency points of
/// lines from a breakpoint to each concave arc, and bitangency points between
/// pairs of arcs. The upper hull of the candidates, evaluated at the prior,
/// is the envelope.
pub fn concavify_1d_exact(model: &CostModel, menu: &Menu, knots: &[Belief]) -> Result<SolveReport> {
    if model.n_states() != 2 {
        return Err(Error::NotTwoStates(model.n_states()));
    }
    let pieces = model
        .measure()
        .pieces()
        .ok_or_else(|| Error::UnsupportedCostFamily(model.family_name().into()))?;
    if model.dim() != 1 {
        return Err(Error::UnsupportedCostFamily("degenerate domain".into()));
    }
    let chart = model.chart();
    let ends: Vec<f64> = model
        .measure()
        .domain()
        .vertices()
        .iter()
        .map(|v| chart.apply(v)[0])
        .collect();
    let ylo = ends.iter().copied().fold(f64::INFINITY, f64::min);
    let yhi = ends.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y0 = model.prior_chart()[0];

    let mut breaks: Vec<f64> = vec![ylo, yhi, y0];
    for k in knots {
        breaks.push(chart.apply(k.as_slice())[0]);
    }
    // Cell boundaries along the line p(y) = u + J y.
    let u = chart.invert_raw(&[0.0]);
    let j: Vec<f64> = chart
        .invert_raw(&[1.0])
        .iter()
        .zip(&u)
        .map(|(a, b)| a - b)
        .collect();
    for pc in pieces {
        for h in &pc.cell {
            let s1 = dot(&h.normal, &j);
            if s1.abs() > 1e-15 {
                breaks.push((h.offset - dot(&h.normal, &u)) / s1);
            }
        }
    }
    let forms = menu.affine_forms(chart);
    for (i, (ai, bi)) in forms.iter().enumerate() {
        for (aj, bj) in &forms[i + 1..] {
            if (ai[0] - aj[0]).abs() > 1e-15 {
                breaks.push((bj - bi) / (ai[0] - aj[0]));
            }
        }
    }
    breaks.retain(|y| y.is_finite() && *y >= ylo - 1e-15 && *y <= yhi + 1e-15);
    breaks.iter_mut().for_each(|y| *y = y.clamp(ylo, yhi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|b, a| (*b - *a).abs() <= 1e-15);

    // Arcs between consecutive breakpoints.
    let lin = &model.measure().linear;
    let konst = model.measure().constant;
    let mut arcs: Vec<Arc> = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let pm = chart.invert_raw(&[mid]);
        let Some(pc) = pieces.iter().find(|pc| pc.contains(&pm, 1e-12)) else {
            continue;
        };
        let act = forms
            .iter()
            .max_by(|x, y| (x.0[0] * mid + x.1).total_cmp(&(y.0[0] * mid + y.1)))
            .expect("nonempty menu");
        // ψ̄(y) along the line: (u + J y)ᵀQ(u + J y) + (b + ℓ)·(u + J y) + c + k
        let qjj: f64 = (0..2).map(|r| j[r] * dot(&pc.q[r], &j)).sum();
        let quj: f64 = (0..2).map(|r| u[r] * dot(&pc.q[r], &j)).sum();
        let quu: f64 = (0..2).map(|r| u[r] * dot(&pc.q[r], &u)).sum();
        let bl: Vec<f64> = pc.b.iter().zip(lin).map(|(x, y)| x + y).collect();
        let psi_a = qjj;
        let psi_b = 2.0 * quj + dot(&bl, &j);
        let psi_c = quu + dot(&bl, &u) + pc.c + konst;
        arcs.push(Arc {
            lo,
            hi,
            a: psi_a,
            b: act.0[0] - psi_b,
            c: act.1 - psi_c,
        });
    }

    let net = |y: f64| -> Result<(f64, Belief)> {
        let b = chart.invert(&[y])?;
        let (phi, _) = menu_phi(menu, &b);
        Ok((phi - model.psi_value(&b)?, b))
    };
    let mut candidates: Vec<f64> = breaks.clone();
    for &xb in &breaks {
        let (nb, _) = net(xb)?;
        for arc in arcs.iter().filter(|a| a.a > 1e-15) {
            // a t² - 2a x t + (c + b x - N) = 0
            let disc = xb * xb - (arc.c + arc.b * xb - nb) / arc.a;
            if disc < 0.0 {
                continue;
            }
            for t in [xb - disc.sqrt(), xb + disc.sqrt()] {
                if t > arc.lo && t < arc.hi {
                    candidates.push(t);
                }
            }
        }
    }
    for (i, a1) in arcs.iter().enumerate() {
        for a2 in arcs.iter().skip(i + 1) {
            if a1.a <= 1e-15 || a2.a <= 1e-15 {
                continue;
            }
            // t2 = (b2 - b1 + 2 a1 t1) / (2 a2); a1 t1² + c1 = a2 t2² + c2
            let k0 = (a2.b - a1.b) / (2.0 * a2.a);
            let k1 = a1.a / a2.a;
            // a1 t² + c1 - a2 (k0 + k1 t)² - c2 = 0
            let qa = a1.a - a2.a * k1 * k1;
            let qb = -2.0 * a2.a * k0 * k1;
            let qc = a1.c - a2.a * k0 * k0 - a2.c;
            let roots: Vec<f64> = if qa.abs() < 1e-14 {
                if qb.abs() < 1e-14 {
                    vec![]
                } else {
                    vec![-qc / qb]
                }
            } else {
                let disc = qb * qb - 4.0 * qa * qc;
                if disc < 0.0 {
                    vec![]
                } else {
                    vec![
                        (-qb - disc.sqrt()) / (2.0 * qa),
                        (-qb + disc.sqrt()) / (2.0 * qa),
                    ]
                }
            };
            for t1 in roots {
                let t2 = k0 + k1 * t1;
                if t1 > a1.lo && t1 < a1.hi && t2 > a2.lo && t2 < a2.hi {
                    candidates.push(t1);
                    candidates.push(t2);
                }
            }
        }
    }
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(candidates.len());
    for y in candidates {
        points.push((y, net(y)?.0));
    }
    let hull = upper_hull(&points);
    let (value, ia, ib) = eval_hull(&hull, y0).ok_or(Error::OutsideDomain)?;
    let (support, probs) = if ia == ib {
        (vec![chart.invert(&[hull[ia].0])?], vec![1.0])
    } else {
        let (xa, xb) = (hull[ia].0, hull[ib].0);
        let wb = (y0 - xa) / (xb - xa);
        (
            vec![chart.invert(&[xa])?, chart.invert(&[xb])?],
            vec![1.0 - wb, wb],
        )
    };
    let pi = PosteriorDistribution::new(support, probs, model.prior().clone())?;
    let mut gross = 0.0;
    let mut cost = 0.0;
    let mut assignments = Vec::new();
    for (s, w) in pi.support().iter().zip(pi.probs()) {
        let (phi, arg) = menu_phi(menu, s);
        gross += w * phi;
        cost += w * model.psi_value(s)?;
        assignments.push(arg[0]);
    }
    let slope = if ia == ib {
        Vec::new()
    } else {
        vec![(hull[ib].1 - hull[ia].1) / (hull[ib].0 - hull[ia].0)]
    };
    Ok(SolveReport {
        value,
        optimal_pi: pi,
        assignments,
        gross_payoff: gross,
        info_cost: cost,
        dual_slope: slope,
        grid_stats: GridStats {
            resolution: 0,
            points: hull.len(),
            refined_columns: 0,
        },
    })
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::axioms::{check_iia, Verdict};
use super::ndisd::{jdd_check, JddVerdict};
use crate::beliefs::Grid;
use crate::costs::CostModel;
use crate::linalg::{dot, sub};
use crate::menus::{act_from_affine, menu_union, Act, Menu};
use crate::solver::{lambda_set, solve_menu, HyperplaneSet};
use crate::{Result, TOL_WIDTH};

/// One to four acts with utilities in `[-2, 2]`, plus the zero act half the
/// time.
pub fn random_menu<R: Rng>(rng: &mut R, n_states: usize) -> Menu {
    let count = rng.gen_range(1..=4);
    let mut acts: Vec<Act> = (0..count)
        .map(|i| {
            Act::new(
                format!("r{i}"),
                (0..n_states).map(|_| rng.gen_range(-2.0..=2.0)).collect(),
            )
        })
        .collect();
    if rng.gen_bool(0.5) {
        acts.push(Act::zero(n_states));
    }
    Menu::new(acts).expect("nonempty menu")
}

/// Cross-check of the three characterizations on one model: the JDD
/// verdict, uniqueness of optimal hyperplanes over random menus, and
/// absence of axiom violations over random menu pairs.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceSweep {
    pub family: String,
    pub jdd: JddVerdict,
    pub uhp_max_width: f64,
    pub uhp_holds: bool,
    pub menus: usize,
    pub pairs: usize,
    /// Pairs whose IIA premise held.
    pub premises_held: usize,
    pub iia_violations: usize,
    pub axioms_hold: bool,
    pub consistent: bool,
}

/// An act that touches the hyperplane `λ·(y - y₀) + V` from below after
/// subtracting `ψ̄`, with slope `s`.
///
/// The intercept solves `max_y (s - λ)·(y - y₀) + β' - ψ̄(y) = V`, which is a
/// conjugate evaluation; adding the act to a menu whose optimal hyperplanes
/// include `λ` leaves the value unchanged.
fn touching_act(model: &CostModel, lambda: &[f64], v: f64, s: &[f64]) -> Act {
    let y0 = model.prior_chart();
    let tilt = sub(s, lambda);
    let (_, _, conj) = model.conjugate(&tilt);
    let level = v - conj + dot(&tilt, y0);
    act_from_affine(model.chart(), s, y0, level)
}

fn widest(lam: &HyperplaneSet) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = lam
        .widths
        .iter()
        .enumerate()
        .filter(|(_, w)| w.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))?
        .0;
    let (lo, hi) = lam.extremes.get(k)?.clone();
    (lo.iter().chain(&hi).all(|x| x.is_finite())).then_some((lo, hi))
}

/// Sample `menus` random menus for hyperplane widths and `pairs` menu pairs
/// for IIA.
///
/// Half of the pairs are plain random menus sharing a random core. The
/// other half are aimed at the premise: both menus extend a core `C` by one
/// act touching, respectively, the lowest and the highest optimal
/// hyperplane of `C` along its widest direction, so `F ∼ C ∼ G` holds by
/// construction and the union tests whether the two hyperplanes are really
/// distinct. Every draw is seeded from `seed` and its index.
pub fn equivalence_sweep(
    model: &CostModel,
    grid: &Grid,
    menus: usize,
    pairs: usize,
    seed: u64,
) -> Result<EquivalenceSweep> {
    let n = model.n_states();
    let jdd = jdd_check(model)?.verdict;
    let mut uhp_max_width: f64 = 0.0;
    for i in 0..menus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let menu = random_menu(&mut rng, n);
        let report = solve_menu(model, &menu, grid)?;
        let lam = lambda_set(model, &menu, grid, &report)?;
        uhp_max_width = uhp_max_width.max(lam.max_width);
    }
    let mut iia_violations = 0;
    let mut premises_held = 0;
    for i in 0..pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E37_79B9_0000 + i as u64));
        let core = random_menu(&mut rng, n);
        let (f, g) = if i % 2 == 0 {
            let report = solve_menu(model, &core, grid)?;
            let lam = lambda_set(model, &core, grid, &report)?;
            let Some((lo, hi)) = widest(&lam) else {
                continue;
            };
            let jitter = |rng: &mut ChaCha8Rng, base: &[f64]| -> Vec<f64> {
                base.iter().map(|b| b + rng.gen_range(-4.0..=4.0)).collect()
            };
            let sf = jitter(&mut rng, &lo);
            let sg = jitter(&mut rng, &hi);
            let fa = touching_act(model, &lo, report.value, &sf);
            let ga = touching_act(model, &hi, report.value, &sg);
            (
                menu_union(&core, &Menu::singleton(fa)),
                menu_union(&core, &Menu::singleton(ga)),
            )
        } else {
            let extra = |rng: &mut ChaCha8Rng| random_menu(rng, n);
            let fe = extra(&mut rng);
            let ge = extra(&mut rng);
            (menu_union(&core, &fe), menu_union(&core, &ge))
        };
        let report = check_iia(model, &f, &g, grid)?;
        if report.premise_holds {
            premises_held += 1;
        }
        if report.verdict == Verdict::Violated {
            iia_violations += 1;
        }
    }
    let uhp_holds = uhp_max_width <= TOL_WIDTH;
    let axioms_hold = iia_violations == 0;
    let consistent = match jdd {
        JddVerdict::Satisfied => uhp_holds && axioms_hold,
        JddVerdict::Violated => !uhp_holds && !axioms_hold,
        JddVerdict::Inconclusive => uhp_holds == axioms_hold,
    };
    Ok(EquivalenceSweep {
        family: model.family_name().to_string(),
        jdd,
        uhp_max_width,
        uhp_holds,
        menus,
        pairs,
        premises_held,
        iia_violations,
        axioms_hold,
        consistent,
    })
}

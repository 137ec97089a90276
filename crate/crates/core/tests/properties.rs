//! Randomized invariants of costs, menu values and certificates.

mod common;

use common::*;
use inattention::beliefs::{garble, make_grid, Belief, PosteriorDistribution};
use inattention::costs::{canonicalize, make_cost, CostModel, CostSpec};
use inattention::diagnostics::{d_set, ndisd_probe};
use inattention::menus::{menu_translate, menu_union, Act, Menu};
use inattention::solver::{
    concavify_1d_exact, lambda_set, solve_menu, solve_menu_with, SolveOptions,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family(i: usize, prior: &Belief) -> CostModel {
    let spec = match i % 3 {
        0 => CostSpec::entropy(),
        1 => CostSpec::quadratic(0.5 + i as f64 * 0.25),
        _ => CostSpec::kinked_abs_quad(0.7, 1.3, None),
    };
    make_cost(&spec, prior).unwrap()
}

fn act2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 2)
}

fn menu2() -> impl Strategy<Value = Menu> {
    prop::collection::vec(act2(), 1..5).prop_map(|acts| menu_n(&acts))
}

fn no_refine() -> SolveOptions {
    SolveOptions {
        refine: false,
        ..SolveOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn garbling_never_raises_cost(seed in any::<u64>(), fam in 0usize..6, k in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let support: Vec<Belief> = (0..k).map(|_| interior_belief(&mut rng, 2, 0.02)).collect();
        let raw: Vec<f64> = (0..k).map(|i| 0.1 + ((seed >> (i * 7)) % 97) as f64).collect();
        let s: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let mut prior = vec![0.0; 2];
        for (p, w) in support.iter().zip(&probs) {
            prior[0] += w * p.as_slice()[0];
            prior[1] += w * p.as_slice()[1];
        }
        let prior = Belief::new(prior).unwrap();
        let model = family(fam, &prior);
        let pi = PosteriorDistribution::new(support, probs, prior.clone()).unwrap();
        let cut = 1 + (seed as usize % (pi.len().max(2) - 1));
        let groups = vec![(0..cut).collect::<Vec<_>>(), (cut..pi.len()).collect()];
        let groups: Vec<Vec<usize>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
        let coarse = garble(&pi, &groups).unwrap();
        let fine_cost = model.cost_of(&pi).unwrap();
        let coarse_cost = model.cost_of(&coarse).unwrap();
        prop_assert!(coarse_cost <= fine_cost + 1e-9, "{coarse_cost} > {fine_cost}");
        prop_assert!(coarse_cost >= -1e-12);
        let none = model.cost_of(&PosteriorDistribution::degenerate(prior)).unwrap();
        prop_assert!(none.abs() < 1e-12);
    }

    #[test]
    fn translation_shifts_value(f in menu2(), h in act2(), fam in 0usize..3) {
        let model = family(fam, &b(0.5));
        let grid = make_grid(&model, 65, &[]).unwrap();
        let h = Act::new("h", h);
        let base = solve_menu(&model, &f, &grid).unwrap().value;
        let moved = solve_menu(&model, &menu_translate(&f, &h), &grid).unwrap().value;
        prop_assert!((moved - base - h.expected(model.prior())).abs() < 1e-7);
    }

    #[test]
    fn grid_lp_matches_exact_envelope_when_breakpoints_are_on_the_grid(
        f in menu2(), fam in 1usize..3, prior in 0.1f64..0.9,
    ) {
        // The exact envelope covers the piecewise-quadratic families.
        let model = family(fam, &b(prior));
        let exact = concavify_1d_exact(&model, &f, &[]).unwrap();
        let grid = make_grid(&model, 33, exact.optimal_pi.support()).unwrap();
        let lp = solve_menu_with(&model, &f, &grid, &no_refine()).unwrap();
        prop_assert!((lp.value - exact.value).abs() < 1e-9, "{} vs {}", lp.value, exact.value);
    }

    #[test]
    fn finer_grids_never_lose_value(f in menu2(), fam in 0usize..3) {
        let model = family(fam, &b(0.5));
        let mut last = f64::NEG_INFINITY;
        for res in [3usize, 5, 9, 17, 33, 65] {
            let grid = make_grid(&model, res, &[]).unwrap();
            let v = solve_menu_with(&model, &f, &grid, &no_refine()).unwrap().value;
            prop_assert!(v >= last - 1e-12, "res {res}: {v} < {last}");
            last = v;
        }
        let grid = make_grid(&model, 65, &[]).unwrap();
        let refined = solve_menu(&model, &f, &grid).unwrap().value;
        prop_assert!(refined >= last - 1e-12);
    }

    #[test]
    fn larger_menus_are_worth_more(f in menu2(), g in menu2(), fam in 0usize..3) {
        let model = family(fam, &b(0.5));
        let grid = make_grid(&model, 65, &[]).unwrap();
        let vf = solve_menu(&model, &f, &grid).unwrap().value;
        let vu = solve_menu(&model, &menu_union(&f, &g), &grid).unwrap().value;
        prop_assert!(vu >= vf - 1e-9);
        let no_info = f.acts().iter().map(|a| a.expected(model.prior())).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(vf >= no_info - 1e-9);
    }

    #[test]
    fn canonical_form_is_stable(
        fam in 0usize..3, xi in prop::collection::vec(-3.0f64..3.0, 2), c in -2.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let prior = b(0.4);
        let model = family(fam, &prior);
        let again = canonicalize(model.measure(), model.prior()).unwrap();
        let tilted = canonicalize(&model.tilted_measure(&xi).shifted(c), model.prior()).unwrap();
        let smooth_at_prior = model.psi_subdiff(&prior).unwrap().is_singleton();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let p = interior_belief(&mut rng, 2, 1e-6);
            let v = model.psi_value(&p).unwrap();
            prop_assert!((again.psi_value(&p).unwrap() - v).abs() < 1e-10);
            if smooth_at_prior {
                prop_assert!((tilted.psi_value(&p).unwrap() - v).abs() < 1e-9);
            }
            // Costs agree whether or not the canonical forms do.
            let q = interior_belief(&mut rng, 2, 1e-6);
            let (x, y, x0) = (p.as_slice()[1], q.as_slice()[1], 0.4);
            if (x - x0) * (y - x0) < 0.0 {
                let w = (x0 - y) / (x - y);
                let pi = PosteriorDistribution::new(vec![p.clone(), q], vec![w, 1.0 - w], prior.clone()).unwrap();
                prop_assert!((tilted.cost_of(&pi).unwrap() - model.cost_of(&pi).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn values_do_not_depend_on_the_chart(f in menu2(), l in prop_oneof![-4.0f64..-0.2, 0.2f64..4.0]) {
        let model = make_cost(&CostSpec::entropy(), &b(0.5)).unwrap();
        let moved = model.with_chart(&[vec![l]]).unwrap();
        let grid = make_grid(&model, 65, &[]).unwrap();
        let grid_moved = make_grid(&moved, 65, &[]).unwrap();
        let r = solve_menu(&model, &f, &grid).unwrap();
        let rm = solve_menu(&moved, &f, &grid_moved).unwrap();
        prop_assert!((r.value - rm.value).abs() < 1e-9);
        let lam = lambda_set(&model, &f, &grid, &r).unwrap();
        let lam_moved = lambda_set(&moved, &f, &grid_moved, &rm).unwrap();
        prop_assert!((lam_moved.witness[0] - lam.witness[0] / l).abs() < 1e-6);
    }

    #[test]
    fn subgradients_support_the_measure(fam in 0usize..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = family(fam, &b(0.5));
        let chart = model.chart();
        for _ in 0..10 {
            let p = interior_belief(&mut rng, 2, 1e-3);
            let q = interior_belief(&mut rng, 2, 1e-6);
            let sub = model.psi_subdiff(&p).unwrap();
            let (yp, yq) = (chart.apply(p.as_slice()), chart.apply(q.as_slice()));
            for g in &sub.vertices {
                let lower = model.psi_value(&p).unwrap() + g[0] * (yq[0] - yp[0]);
                prop_assert!(model.psi_value(&q).unwrap() >= lower - 1e-12);
            }
        }
    }

    #[test]
    fn d_sets_are_bounded_and_contain_zero(lo in 0.0f64..0.5, hi in 0.5f64..1.0, with_prior in any::<bool>()) {
        let model = kinked();
        let mut points = vec![b(lo), b(hi)];
        if with_prior {
            points.push(b(0.5));
        }
        let d = d_set(&model, &points).unwrap();
        let bound = 2.0 * points
            .iter()
            .flat_map(|p| model.psi_subdiff(p).unwrap().vertices)
            .map(|v| v[0].abs())
            .fold(0.0, f64::max);
        let (mn, mx) = d.vertices.iter().map(|v| v[0]).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, c), x| (a.min(x), c.max(x)));
        prop_assert!(mn <= 1e-12 && mx >= -1e-12);
        prop_assert!(mn.abs().max(mx.abs()) <= bound + 1e-9);
        let cert = ndisd_probe(&model, &points).unwrap();
        // A certificate exists exactly when D has a nonzero element.
        prop_assert_eq!(cert.is_some(), mx - mn > 1e-8);
    }
}

#[test]
fn three_state_menus_respect_translation() {
    let model = make_cost(
        &CostSpec::entropy(),
        &Belief::new(vec![0.2, 0.3, 0.5]).unwrap(),
    )
    .unwrap();
    let grid = make_grid(&model, 17, &[]).unwrap();
    let f = menu_n(&[
        vec![1.0, -1.0, 0.0],
        vec![-0.5, 0.8, 0.1],
        vec![0.0, 0.0, 0.3],
    ]);
    let h = Act::new("h", vec![0.3, -0.2, 0.9]);
    let base = solve_menu(&model, &f, &grid).unwrap().value;
    let moved = solve_menu(&model, &menu_translate(&f, &h), &grid)
        .unwrap()
        .value;
    assert!((moved - base - h.expected(model.prior())).abs() < 1e-7);
}

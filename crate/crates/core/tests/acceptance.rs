//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! Tolerances are fixed here and never relaxed; a criterion that cannot be
//! met fails and says why.

mod common;

use std::time::Instant;

use common::*;
use inattention::beliefs::{garble, make_grid, Belief, PosteriorDistribution};
use inattention::costs::{
    canonicalize, make_cost, make_finite_psi, CostFamily, CostModel, CostSpec,
};
use inattention::diagnostics::{
    build_iia_counterexample, check_ie_finite, equivalence_sweep, jdd_check, ndisd_probe,
    random_menu, recover_psi, JddVerdict, Verdict,
};
use inattention::menus::{menu_translate, menu_union, Act, Menu};
use inattention::solver::{concavify_1d_exact, lambda_set, solve_menu};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(failures: &mut Vec<String>, ok: bool, what: String) {
    if !ok {
        failures.push(what);
    }
}

fn finish(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome {
            pass: true,
            detail: summary,
        }
    } else {
        Outcome {
            pass: false,
            detail: format!("{summary}; failed: {}", failures.join("; ")),
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let m = kinked();
    let grid = make_grid(&m, 257, &[]).unwrap();
    let cases: [(&str, Vec<[f64; 2]>, f64); 4] = [
        ("{0}", vec![Z], 0.0),
        ("{0,a}", vec![Z, A], 0.0),
        ("{0,b}", vec![Z, B], 0.0),
        ("{0,a,b}", vec![Z, A, B], 0.4375),
    ];
    let mut worst_oracle: f64 = 0.0;
    let mut union_value = f64::NAN;
    for (name, acts, want) in &cases {
        let f = menu(acts);
        let r = solve_menu(&m, &f, &grid).unwrap();
        check(
            &mut fails,
            (r.value - want).abs() <= 1e-7,
            format!("V{name} = {} (want {want})", r.value),
        );
        let exact = concavify_1d_exact(&m, &f, &[]).unwrap();
        worst_oracle = worst_oracle.max((exact.value - r.value).abs());
        if *name == "{0,a,b}" {
            union_value = r.value;
            let mut supp: Vec<(f64, f64)> = r
                .optimal_pi
                .support()
                .iter()
                .zip(r.optimal_pi.probs())
                .map(|(p, w)| (p.as_slice()[1], *w))
                .collect();
            supp.sort_by(|a, b| a.0.total_cmp(&b.0));
            let ok = supp.len() == 2
                && supp[0].0.abs() < 1e-9
                && (supp[1].0 - 1.0).abs() < 1e-9
                && (supp[0].1 - 0.5).abs() < 1e-9
                && (supp[1].1 - 0.5).abs() < 1e-9;
            check(&mut fails, ok, format!("optimal posteriors {supp:?}"));
        }
    }
    check(
        &mut fails,
        worst_oracle <= 1e-9,
        format!("1-D hull oracle differs by {worst_oracle:e}"),
    );
    let brute = brute_envelope_1d(&[Z.to_vec(), A.to_vec(), B.to_vec()], kinked_psi, 0.5, 1024);
    check(
        &mut fails,
        (brute - 0.4375).abs() <= 1e-7,
        format!("brute-force envelope {brute}"),
    );
    let elapsed = start.elapsed().as_secs_f64();
    check(
        &mut fails,
        elapsed < 1.0,
        format!("runtime {elapsed:.3}s ≥ 1s"),
    );
    finish(
        fails,
        format!(
            "V{{0,a,b}} = {union_value:.10}, hull oracle gap {worst_oracle:.1e}, {elapsed:.3}s \
             (direct evaluation at posteriors {{0, 1}} gives 0.4375)"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut fails = Vec::new();
    let m = kinked();
    let grid = make_grid(&m, 257, &[]).unwrap();
    let lam_of = |model: &CostModel, f: &Menu, grid| {
        let r = solve_menu(model, f, grid).unwrap();
        lambda_set(model, f, grid, &r).unwrap()
    };
    let zero = lam_of(&m, &menu(&[Z]), &grid);
    check(
        &mut fails,
        (zero.max_width - 2.0).abs() <= 1e-6,
        format!("width Λ{{0}} = {}", zero.max_width),
    );
    let (lo, hi) = zero.intervals[0];
    check(
        &mut fails,
        (lo + 1.0).abs() <= 1e-6 && (hi - 1.0).abs() <= 1e-6,
        format!("Λ{{0}} = [{lo}, {hi}]"),
    );
    let za = lam_of(&m, &menu(&[Z, A]), &grid);
    check(
        &mut fails,
        za.max_width <= 1e-6,
        format!("width Λ{{0,a}} = {}", za.max_width),
    );
    check(
        &mut fails,
        (za.witness[0] - 1.0).abs() <= 1e-6,
        format!("witness Λ{{0,a}} = {:?}", za.witness),
    );
    let e = make_cost(&CostSpec::entropy(), &b(0.5)).unwrap();
    let eg = make_grid(&e, 129, &[]).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let f = random_menu(&mut rng, 2);
        worst = worst.max(lam_of(&e, &f, &eg).max_width);
    }
    check(
        &mut fails,
        worst <= 1e-6,
        format!("entropy max width {worst:e}"),
    );
    finish(
        fails,
        format!(
            "Λ{{0}} = [{lo:.9}, {hi:.9}], Λ{{0,a}} = {{{:.9}}}, entropy max width over 200 menus {worst:.1e}",
            za.witness[0]
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut fails = Vec::new();
    let m = kinked();
    let cert = match ndisd_probe(&m, &[b(0.5)]) {
        Ok(Some(c)) => c,
        other => {
            return Outcome {
                pass: false,
                detail: format!("no certificate: {other:?}"),
            }
        }
    };
    check(
        &mut fails,
        (cert.delta[0] - 2.0).abs() <= 1e-9,
        format!("δ = {:?}", cert.delta),
    );
    let r = match build_iia_counterexample(&m, &cert) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("construction failed: {e}"),
            }
        }
    };
    check(
        &mut fails,
        (r.epsilon[0] - 0.25).abs() <= 1e-15,
        format!("ε = {:?}", r.epsilon),
    );
    let v = &r.values;
    for (name, x) in [("F", v.f), ("G", v.g), ("F∩G", v.intersection)] {
        check(&mut fails, x.abs() <= 1e-7, format!("V({name}) = {x}"));
    }
    check(
        &mut fails,
        v.union >= 0.25,
        format!("V(F∪G) = {} < 0.25", v.union),
    );
    let acts: Vec<Vec<f64>> = menu_union(&r.f, &r.g)
        .acts()
        .iter()
        .map(|a| a.utilities.clone())
        .collect();
    let brute = brute_envelope_1d(&acts, kinked_psi, 0.5, 1024);
    check(
        &mut fails,
        (brute - 0.4375).abs() <= 1e-7,
        format!("brute-force V(F∪G) = {brute}"),
    );
    check(
        &mut fails,
        (v.union - 0.4375).abs() <= 1e-7,
        format!("solver V(F∪G) = {}", v.union),
    );
    finish(
        fails,
        format!(
            "V(F)={:.1e} V(G)={:.1e} V(F∩G)={:.1e} V(F∪G)={:.10} (bound {}, brute force {brute:.10})",
            v.f, v.g, v.intersection, v.union, r.predicted_lower_bound
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let mut lines = Vec::new();
    for (name, model) in builtins_two_state() {
        let grid = make_grid(&model, 129, &[]).unwrap();
        match equivalence_sweep(&model, &grid, 200, 200, 0x5EED) {
            Ok(s) => {
                lines.push(format!(
                    "{name}: jdd {:?}, uhp width {:.1e}, iia violations {}/{} (premise held {})",
                    s.jdd, s.uhp_max_width, s.iia_violations, s.pairs, s.premises_held
                ));
                check(&mut fails, s.consistent, format!("{name} inconsistent"));
            }
            Err(e) => fails.push(format!("{name}: {e}")),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        &mut fails,
        elapsed < 60.0,
        format!("runtime {elapsed:.1}s ≥ 60s"),
    );
    finish(fails, format!("{} [{elapsed:.1}s]", lines.join(" | ")))
}

fn finite_spec() -> CostSpec {
    CostSpec::new(
        CostFamily::FiniteMax,
        json!({"components": [
            {"type": "constant", "params": {"value": 0.0}},
            {"type": "quadratic", "params": {"scale": 1.0}, "offset": -0.1}
        ]}),
    )
}

/// Value of a two-state menu under `max(0, E(x-½)² - 0.1)`, computed as
/// `min_μ cav(φ - μ ψ₂)(½)` over `μ ∈ [0, 1]`: each inner envelope is an
/// upper hull over a fine grid and the outer minimum is a golden-section
/// search on a convex function.
fn brute_finite_value(acts: &[Vec<f64>]) -> f64 {
    let n = 4096;
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let inner = |mu: f64| {
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| {
                let phi = acts
                    .iter()
                    .map(|u| u[0] * (1.0 - x) + u[1] * x)
                    .fold(f64::NEG_INFINITY, f64::max);
                (x, phi - mu * ((x - 0.5) * (x - 0.5) - 0.1))
            })
            .collect();
        // Upper hull, then its value at ½.
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for p in pts {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let k = hull.iter().position(|p| p.0 >= 0.5).unwrap();
        if hull[k].0 == 0.5 {
            return hull[k].1;
        }
        let (a, b) = (hull[k - 1], hull[k]);
        a.1 + (b.1 - a.1) * (0.5 - a.0) / (b.0 - a.0)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (c, d) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if inner(c) <= inner(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    inner(0.0).min(inner(1.0)).min(inner(0.5 * (lo + hi)))
}

fn criterion_5() -> Outcome {
    let mut fails = Vec::new();
    let m = make_finite_psi(&finite_spec(), &b(0.5)).unwrap();
    let grid = make_grid(&m, 129, &[]).unwrap();
    let scaled = |u: [f64; 2]| [4.0 * u[0], 4.0 * u[1]];
    let f = menu(&[Z, scaled(A), scaled(B)]);
    let r = check_ie_finite(&m, &f, &grid).unwrap();
    check(
        &mut fails,
        r.verdict == Verdict::Violated,
        format!("verdict {:?}", r.verdict),
    );
    check(&mut fails, r.margin >= 0.04, format!("margin {}", r.margin));
    let base: Vec<Vec<f64>> = f.acts().iter().map(|a| a.utilities.clone()).collect();
    let v_brute = brute_finite_value(&base);
    check(
        &mut fails,
        (v_brute - r.premise_values["F"]).abs() <= 1e-6,
        format!("V(F*) {} vs brute force {v_brute}", r.premise_values["F"]),
    );
    // Brute-force minimum gain over tangent acts h(p̄) = V + s (p̄ - ½).
    let mut min_gain = f64::INFINITY;
    for k in -400..=400 {
        let s = k as f64 * 0.05;
        let h = vec![v_brute - 0.5 * s, v_brute + 0.5 * s];
        let mut acts = base.clone();
        acts.push(h);
        min_gain = min_gain.min(brute_finite_value(&acts) - v_brute);
    }
    check(
        &mut fails,
        min_gain >= 0.04,
        format!("brute-force minimum gain {min_gain}"),
    );
    finish(
        fails,
        format!(
            "V(F*) = {:.10}, IE {:?} with margin {:.6} (brute force over slopes in [-20, 20]: {min_gain:.6})",
            r.premise_values["F"], r.verdict, r.margin
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let specs = [
        CostSpec::entropy(),
        CostSpec::quadratic(1.0),
        CostSpec::kinked_abs_quad(1.0, 1.0, None),
    ];

    // Blackwell / Jensen under garbling.
    let mut garble_viol = 0;
    for case in 0..1000 {
        let spec = &specs[case % 3];
        let n = if case % 3 == 2 { 2 } else { 2 + case % 2 };
        let k = rng.gen_range(2..6);
        let support: Vec<Belief> = (0..k).map(|_| interior_belief(&mut rng, n, 0.01)).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let mut prior = vec![0.0; n];
        for (p, w) in support.iter().zip(&probs) {
            for (acc, x) in prior.iter_mut().zip(p.as_slice()) {
                *acc += w * x;
            }
        }
        let prior = Belief::new(prior).unwrap();
        let model = make_cost(spec, &prior).unwrap();
        let pi = PosteriorDistribution::new(support, probs, prior).unwrap();
        let cut = rng.gen_range(1..pi.len().max(2));
        let groups: Vec<Vec<usize>> = [(0..cut).collect::<Vec<_>>(), (cut..pi.len()).collect()]
            .into_iter()
            .filter(|g| !g.is_empty())
            .collect();
        let fine = model.cost_of(&pi).unwrap();
        let coarse = model.cost_of(&garble(&pi, &groups).unwrap()).unwrap();
        if coarse > fine + 1e-9 || coarse < -1e-9 {
            garble_viol += 1;
        }
    }
    check(
        &mut fails,
        garble_viol == 0,
        format!("{garble_viol} garbling violations"),
    );

    // Translation identity.
    let models: Vec<CostModel> = specs
        .iter()
        .map(|s| make_cost(s, &b(0.5)).unwrap())
        .collect();
    let grids: Vec<_> = models
        .iter()
        .map(|m| make_grid(m, 65, &[]).unwrap())
        .collect();
    let mut worst_translation: f64 = 0.0;
    for case in 0..1000 {
        let (m, g) = (&models[case % 3], &grids[case % 3]);
        let f = random_menu(&mut rng, 2);
        let h = Act::new(
            "h",
            vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        );
        let base = solve_menu(m, &f, g).unwrap().value;
        let moved = solve_menu(m, &menu_translate(&f, &h), g).unwrap().value;
        worst_translation = worst_translation.max((moved - base - h.expected(m.prior())).abs());
    }
    check(
        &mut fails,
        worst_translation <= 1e-7,
        format!("translation error {worst_translation:e}"),
    );

    // Recovery of ψ from irrelevant acts.
    let mut worst_recovery: f64 = 0.0;
    for (name, m) in builtins_two_state() {
        let g = make_grid(&m, 33, &[]).unwrap();
        match recover_psi(&m, &g) {
            Ok(r) => worst_recovery = worst_recovery.max(r.max_error),
            Err(e) => fails.push(format!("recover {name}: {e}")),
        }
    }
    check(
        &mut fails,
        worst_recovery <= 1e-7,
        format!("recovery error {worst_recovery:e}"),
    );

    // Canonicalization idempotence and invariance under affine tilts.
    let mut worst_idem: f64 = 0.0;
    let mut worst_tilt_cost: f64 = 0.0;
    let mut worst_tilt_pointwise: f64 = 0.0;
    for case in 0..100 {
        let m = &models[case % 3];
        let again = canonicalize(m.measure(), m.prior()).unwrap();
        let xi = vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let tilted = canonicalize(
            &m.tilted_measure(&xi).shifted(rng.gen_range(-1.0..1.0)),
            m.prior(),
        )
        .unwrap();
        let smooth = m.psi_subdiff(m.prior()).unwrap().is_singleton();
        for p in grids[case % 3].points() {
            let v = m.psi_value(p).unwrap();
            worst_idem = worst_idem.max((again.psi_value(p).unwrap() - v).abs());
            if smooth {
                worst_tilt_pointwise =
                    worst_tilt_pointwise.max((tilted.psi_value(p).unwrap() - v).abs());
            }
        }
        let (x, y) = (rng.gen_range(0.0..0.5), rng.gen_range(0.5..1.0));
        let w = (0.5 - y) / (x - y);
        let pi = PosteriorDistribution::new(vec![b(x), b(y)], vec![w, 1.0 - w], b(0.5)).unwrap();
        worst_tilt_cost =
            worst_tilt_cost.max((tilted.cost_of(&pi).unwrap() - m.cost_of(&pi).unwrap()).abs());
    }
    check(
        &mut fails,
        worst_idem <= 1e-10,
        format!("idempotence error {worst_idem:e}"),
    );
    check(
        &mut fails,
        worst_tilt_cost <= 1e-9,
        format!("tilted cost error {worst_tilt_cost:e}"),
    );
    check(
        &mut fails,
        worst_tilt_pointwise <= 1e-9,
        format!("tilted measure error {worst_tilt_pointwise:e}"),
    );

    // Certificates under a random invertible re-chart.
    let mut chart_cases = 0;
    let k = kinked();
    let ridge = make_cost(&ridge_spec(), &Belief::new(vec![0.25, 0.25, 0.5]).unwrap()).unwrap();
    let ridge_points = vec![
        Belief::new(vec![0.4, 0.1, 0.5]).unwrap(),
        Belief::new(vec![0.1, 0.4, 0.5]).unwrap(),
    ];
    let smooth = make_cost(&CostSpec::quadratic(1.0), &b(0.5)).unwrap();
    for _ in 0..10 {
        let l1 = loop {
            let x: f64 = rng.gen_range(-3.0..3.0);
            if x.abs() > 0.1 {
                break vec![vec![x]];
            }
        };
        let l2 = loop {
            let l: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            if (l[0][0] * l[1][1] - l[0][1] * l[1][0]).abs() > 0.2 {
                break l;
            }
        };
        for (model, points, l) in [
            (&k, vec![b(0.5)], &l1),
            (&ridge, ridge_points.clone(), &l2),
            (&smooth, vec![b(0.5)], &l1),
        ] {
            chart_cases += 1;
            let moved = model.with_chart(l).unwrap();
            let here = ndisd_probe(model, &points).unwrap();
            let there = ndisd_probe(&moved, &points).unwrap();
            if here.is_some() != there.is_some() {
                fails.push(format!("verdict changed under chart {l:?}"));
                continue;
            }
            if let Some(c) = here {
                if let Err(e) = c.transform(l).unwrap().validate(&moved) {
                    fails.push(format!("mapped certificate invalid: {e}"));
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    finish(
        fails,
        format!(
            "garbling 0/{} violations, translation err {worst_translation:.1e} (1000 cases), recovery err {worst_recovery:.1e}, \
             idempotence {worst_idem:.1e}, tilt cost {worst_tilt_cost:.1e} (100 ξ), {chart_cases} re-charts [{elapsed:.1}s]",
            1000
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut fails = Vec::new();
    let q = Belief::uniform(2);
    let e = make_cost(&CostSpec::entropy(), &q).unwrap();
    let full = PosteriorDistribution::new(vec![b(0.0), b(1.0)], vec![0.5, 0.5], q.clone()).unwrap();
    let mi = e.uniform_cost(&q, &full).unwrap();
    check(
        &mut fails,
        (mi - 2f64.ln()).abs() <= 1e-10,
        format!("mutual information {mi}"),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0x7);
    let mut satisfied = 0;
    for i in 0..20 {
        let n = 2 + i % 2;
        let prior = interior_belief(&mut rng, n, 0.02);
        let m = make_cost(&CostSpec::entropy(), &prior).unwrap();
        match jdd_check(&m) {
            Ok(r) if r.verdict == JddVerdict::Satisfied => satisfied += 1,
            Ok(r) => fails.push(format!("prior {:?}: {:?}", prior.as_slice(), r.verdict)),
            Err(e) => fails.push(format!("prior {:?}: {e}", prior.as_slice())),
        }
    }
    finish(
        fails,
        format!(
            "I = {mi:.15} (ln 2 = {:.15}), JDD satisfied at {satisfied}/20 priors",
            2f64.ln()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("worked example values", criterion_1),
        ("optimal hyperplane sets", criterion_2),
        ("counterexample pipeline", criterion_3),
        ("equivalence sampling", criterion_4),
        ("finite family ignorance equivalent", criterion_5),
        ("property suites", criterion_6),
        ("uniform costs", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                p.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{tag}] {name} ({:.2}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

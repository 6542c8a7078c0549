//! Acceptance run: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Built with `harness = false`; exits non-zero when any criterion fails.

mod common;

use std::time::Instant;

use inertia::audit::{self, fit_distortion, rank_certificate, recover_wiu};
use inertia::cps::{
    check_cps, cps_distance, cps_posterior, ecps_posterior, ht_from_ecps, ht_posterior, ladder_from_family, Ladder,
};
use inertia::model::complete_family;
use inertia::persuasion::{
    self, grid_oracle, optimize_binary, optimize_rich, persuasion_slack, PersuasionEnv, Regime, CONSTRAINT_TOL,
};
use inertia::signal::{grether_posterior, DistortionFn, SignalModel};
use inertia::{
    bayesian_function, closed_form_posterior, minimize_over_event, Belief, DeltaSpec, DistanceSpec, Event, IUModel,
    NumericPolicy, SolverConfig, StateSpace, UpdateFamily, UpdateRule, WIUModel,
};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn three_state_prior() -> Belief {
    Belief::new(vec![0.6, 0.35, 0.05]).unwrap()
}

fn space3() -> StateSpace {
    StateSpace::numbered(3).unwrap()
}

fn model(d: DistanceSpec) -> IUModel {
    IUModel::new(space3(), three_state_prior(), d).unwrap()
}

/// Tolerance of half a unit in the last printed decimal.
fn printed_tol(text: &str) -> f64 {
    let decimals = text.split('.').nth(1).map_or(0, str::len) as i32;
    5.0 * 10f64.powi(-(decimals + 1))
}

/// `(event, state, printed value)` triples over the three two-state events.
fn check_table(name: &str, d: DistanceSpec, cells: &[(&str, usize, &str)]) -> Result<usize, String> {
    let m = model(d);
    for &(event, state, printed) in cells {
        let e = m.space.parse_event(event).unwrap();
        let got = inertia::iu_posterior(&m, e).map_err(|err| format!("{name} {event}: {err}"))?.get(state);
        let want: f64 = printed.parse().unwrap();
        ensure((got - want).abs() <= printed_tol(printed), || {
            format!("{name} {event} s{}: got {got:.6}, printed {printed}", state + 1)
        })?;
    }
    Ok(cells.len())
}

fn ac1() -> Outcome {
    let pow = |a| DistanceSpec::distorted(DeltaSpec::Power { alpha: a });
    let mut cells = 0;
    cells += check_table(
        "bayes",
        DistanceSpec::bayesian(),
        &[("s1,s2", 0, "0.63"), ("s1,s2", 1, "0.37"), ("s2,s3", 1, "0.875"), ("s2,s3", 2, "0.125"),
          ("s1,s3", 0, "0.92"), ("s1,s3", 2, "0.08")],
    )?;
    cells += check_table(
        "power 0.8",
        pow(0.8),
        &[("s1,s2", 0, "0.606"), ("s1,s2", 1, "0.394"), ("s2,s3", 1, "0.826"), ("s2,s3", 2, "0.174"),
          ("s1,s3", 0, "0.88"), ("s1,s3", 2, "0.12")],
    )?;
    cells += check_table(
        "power 1.2",
        pow(1.2),
        &[("s1,s2", 0, "0.656"), ("s1,s2", 1, "0.344"), ("s2,s3", 1, "0.912"), ("s2,s3", 2, "0.088"),
          ("s1,s3", 0, "0.95"), ("s1,s3", 2, "0.05")],
    )?;
    cells += check_table(
        "sigmoid",
        DistanceSpec::distorted(DeltaSpec::Sigmoid { a: 6.0, x0: 0.5 }),
        &[("s1,s2", 0, "0.69"), ("s1,s2", 1, "0.31"), ("s2,s3", 1, "0.821"), ("s2,s3", 2, "0.179"),
          ("s1,s3", 0, "0.91"), ("s1,s3", 2, "0.09")],
    )?;
    cells += check_table(
        "mixed",
        DistanceSpec::mixed(Belief::new(vec![0.0, 0.0, 1.0]).unwrap()),
        &[("s1,s2", 0, "0.63"), ("s1,s2", 1, "0.37"), ("s2,s3", 1, "0.25"), ("s2,s3", 2, "0.75"),
          ("s1,s3", 0, "0.36"), ("s1,s3", 2, "0.64")],
    )?;

    // Confirmation bias against its symbolic column at b = 0.1.
    let b = 0.1;
    let m = model(DistanceSpec::distorted(DeltaSpec::ConfirmationBias { b }));
    let symbolic = [
        ("s1,s2", [(12.0 + 20.0 * b) / (19.0 + 20.0 * b), 7.0 / (19.0 + 20.0 * b), 0.0]),
        ("s1,s3", [(12.0 + 20.0 * b) / (13.0 + 20.0 * b), 0.0, 1.0 / (13.0 + 20.0 * b)]),
        ("s2,s3", [0.0, 0.875, 0.125]),
    ];
    for (event, want) in symbolic {
        let got = inertia::iu_posterior(&m, m.space.parse_event(event).unwrap()).unwrap();
        let gap = got.probs().iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
        ensure(gap < 1e-12, || format!("confirmation bias {event}: off by {gap:e}"))?;
        cells += 2;
    }
    ensure((m.update(m.space.parse_event("s1,s2").unwrap()).unwrap().get(0) - 14.0 / 21.0).abs() < 1e-12, || {
        "confirmation bias 14/21".into()
    })?;

    // Signal tables, four printed decimals.
    let signal_rows = [
        (1.0, 1.0, ["0.7143", "0.5263"]),
        (0.8, 1.4, ["0.7264", "0.4603"]),
        (0.8, 0.8, ["0.6755", "0.5211"]),
        (1.2, 1.0, ["0.7347", "0.5517"]),
    ];
    for (alpha, beta, printed) in signal_rows {
        let sm = SignalModel::new(
            vec!["H".into(), "L".into()],
            vec!["h".into(), "l".into()],
            Belief::new(vec![0.625, 0.375]).unwrap(),
            vec![vec![0.6, 0.4], vec![0.4, 0.6]],
            DistortionFn::power(beta),
            DistortionFn::power(alpha),
        )
        .unwrap();
        for (msg, p) in printed.iter().enumerate() {
            let got = grether_posterior(&sm, msg).unwrap().get(0);
            let want: f64 = p.parse().unwrap();
            ensure((got - want).abs() <= printed_tol(p), || {
                format!("signal alpha={alpha} beta={beta} message {msg}: got {got:.6}, printed {p}")
            })?;
            cells += 1;
        }
    }
    Ok(format!("{cells} cells within half a printed unit"))
}

fn ac2() -> Outcome {
    let mut rng = common::rng(2);
    let cfg = SolverConfig::default();
    let policy = NumericPolicy::default();
    let mut worst: f64 = 0.0;
    let mut solves = 0;
    for inst in 0..50 {
        let n = 3 + inst % 3;
        for variant in common::VARIANTS {
            let d = common::distance(&mut rng, variant, n);
            let prior = if variant == "support_dependent" && inst % 2 == 0 {
                // Leave a null state so the fallback anchor is exercised.
                let mut states: Vec<usize> = (0..n).collect();
                states.remove(rng.gen_range(0..n));
                common::supported_on(&mut rng, n, &states, 0.02)
            } else {
                common::interior(&mut rng, n, 0.02)
            };
            for e in Event::all_nonempty(n) {
                let exact = closed_form_posterior(&d, &prior, e, &policy)
                    .map_err(|err| format!("{variant} closed form: {err}"))?
                    .ok_or_else(|| format!("{variant}: no closed form on {e}"))?;
                let generic =
                    minimize_over_event(&d, &prior, e, &cfg).map_err(|err| format!("{variant} solver: {err}"))?;
                let gap = generic.sup_dist(&exact);
                worst = worst.max(gap);
                solves += 1;
                ensure(gap <= 1e-6, || format!("{variant} n={n} {e}: sup gap {gap:e}"))?;
            }
        }
    }
    Ok(format!("{solves} solves, worst sup gap {worst:.2e}"))
}

fn ac3() -> Outcome {
    let mut rng = common::rng(3);
    let mut margin = f64::INFINITY;
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=6);
        let s = common::sigma(&mut rng);
        let mu = common::interior(&mut rng, n, 0.0);
        let pi = common::interior(&mut rng, n, 0.0);
        let v = bayesian_function(mu.probs(), pi.probs(), &s).map_err(|e| e.to_string())?;
        let lo = -inertia::sigma_eval(&s, 1.0).unwrap();
        let hi = -inertia::sigma_eval(&s, 0.0).unwrap();
        let m = (v - lo).min(hi - v);
        margin = margin.min(m);
        ensure(m >= -1e-12, || format!("{s:?}: value {v} outside [{lo}, {hi}]"))?;
    }
    Ok(format!("10000 draws, smallest margin {margin:.2e}"))
}

/// Bayes update of the first level with positive mass.
fn first_positive_level(l: &Ladder, e: Event) -> Belief {
    let lvl = l.levels().iter().find(|b| b.mass(e) > 0.0).expect("partition ladder reaches every state");
    let mass = lvl.mass(e);
    Belief::new((0..l.n()).map(|i| if e.contains(i) { lvl.get(i) / mass } else { 0.0 }).collect()).unwrap()
}

fn coin() -> Ladder {
    let file = serde_json::from_str(include_str!("../fixtures/coin_ladder.json")).unwrap();
    Ladder::from_file(file).unwrap().0
}

fn ac4() -> Outcome {
    let l = coin();
    let events: Vec<Event> = Event::all_nonempty(6).collect();
    for &e in &events {
        let got = cps_posterior(&l, e).map_err(|err| err.to_string())?;
        let want = first_positive_level(&l, e);
        ensure(got.sup_dist(&want) < 1e-12, || format!("coin {}: wrong level", l.space().format_event(e)))?;
    }
    let mid = l.space().parse_event("e,e',l1,l2").unwrap();
    ensure(cps_posterior(&l, mid).unwrap() == l.levels()[1], || "coin: {e,e',l1,l2} does not select level 1".into())?;
    let fam = complete_family(&l).unwrap();
    let report = check_cps(&fam);
    ensure(report.passed, || format!("check_cps on coin: {:?}", report.violations.first()))?;
    let back = ladder_from_family(&fam).map_err(|e| e.to_string())?;
    ensure(
        back.levels().len() == 3 && back.levels().iter().zip(l.levels()).all(|(a, b)| a.sup_dist(b) < 1e-12),
        || "coin ladder does not round-trip".into(),
    )?;

    let mut rng = common::rng(4);
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let lad = common::ladder(&mut rng, 4);
        let fam = complete_family(&lad).unwrap();
        ensure(check_cps(&fam).passed, || "random ladder family is not a CPS".into())?;
        let back = ladder_from_family(&fam).map_err(|e| e.to_string())?;
        ensure(
            back.levels().len() == lad.levels().len()
                && back.levels().iter().zip(lad.levels()).all(|(a, b)| a.sup_dist(b) < 1e-9),
            || "random ladder does not round-trip".into(),
        )?;
        let dist = cps_distance(&lad, common::sigma(&mut rng)).map_err(|e| e.to_string())?;
        for e in Event::all_nonempty(4) {
            let argmin = dist.minimize(e, &cfg).map_err(|err| err.to_string())?;
            let gap = argmin.sup_dist(&cps_posterior(&lad, e).unwrap());
            worst = worst.max(gap);
            ensure(gap <= 1e-6, || format!("ladder distance argmin off by {gap:e} on {e}"))?;
        }
    }
    Ok(format!("63 coin events; 20 random ladders, worst argmin gap {worst:.2e}"))
}

fn ac5() -> Outcome {
    let mut rng = common::rng(5);
    let mut checked = 0;
    let mut skipped = 0;
    for _ in 0..20 {
        let n = rng.gen_range(3..=5);
        let lad = common::ladder(&mut rng, n);
        for eps in [0.0, 0.1, 0.2] {
            let c = ht_from_ecps(&lad, eps).map_err(|e| format!("eps {eps}: {e}"))?;
            if eps == 0.0 {
                ensure(c.model.epsilon() == 0.0, || format!("threshold {} at eps 0", c.model.epsilon()))?;
            }
            for e in Event::all_nonempty(n) {
                match ecps_posterior(&lad, eps, e) {
                    Ok(want) => {
                        let got = ht_posterior(&c.model, e).map_err(|err| err.to_string())?;
                        ensure(got.sup_dist(&want) < 1e-9, || format!("eps {eps} {e}: HT differs"))?;
                        checked += 1;
                    }
                    Err(inertia::Error::Unreachable(_)) => {
                        ensure(c.unreachable.contains(&e), || format!("{e} unreachable but not reported"))?;
                        skipped += 1;
                    }
                    Err(err) => return Err(err.to_string()),
                }
            }
        }
    }
    Ok(format!("{checked} event checks agree; {skipped} unreachable events reported"))
}

/// Audits a model's theory says must pass, by axiom name.
fn predicted(variant: &str, monotone: bool) -> Vec<&'static str> {
    let mut v = vec!["dynamic_coherence"];
    match variant {
        "bayesian_divergence" => v.extend([
            "consequentialism",
            "dynamic_consistency",
            "conditional_consistency",
            "consistency",
            "iia",
            "monotonicity",
            "cps",
        ]),
        "distorted" => {
            v.extend(["consequentialism", "consistency", "iia"]);
            if monotone {
                v.push("monotonicity");
            }
        }
        "ladder" => v.extend(["consequentialism", "conditional_consistency", "cps"]),
        _ => v.push("consequentialism"),
    }
    v
}

fn ac6() -> Outcome {
    let mut rng = common::rng(6);
    let kinds = ["bayesian_divergence", "distorted", "mixed", "support_dependent", "euclidean", "ladder"];
    let mut checks = 0;
    for inst in 0..100 {
        let kind = kinds[inst % kinds.len()];
        let n = 3 + inst % 2;
        let fam = if kind == "ladder" {
            complete_family(&common::ladder(&mut rng, n)).unwrap()
        } else {
            let d = common::distance(&mut rng, kind, n);
            let m = IUModel::new(StateSpace::numbered(n).unwrap(), common::interior(&mut rng, n, 0.02), d).unwrap();
            complete_family(&m).map_err(|e| format!("{kind}: {e}"))?
        };
        let reports = audit::run_all(&fam);
        for axiom in predicted(kind, true) {
            let r = reports.iter().find(|r| r.axiom == axiom).unwrap();
            ensure(r.passed, || format!("{kind} instance {inst}: {axiom} failed: {:?}", r.violations.first()))?;
            checks += 1;
        }
        if kind == "euclidean" {
            let r = reports.iter().find(|r| r.axiom == "dynamic_consistency").unwrap();
            ensure(!r.passed, || format!("euclidean instance {inst} passed dynamic consistency"))?;
            checks += 1;
        }
    }
    let t5 = complete_family(&model(DistanceSpec::mixed(Belief::new(vec![0.0, 0.0, 1.0]).unwrap()))).unwrap();
    let mono = audit::check_monotonicity(&t5);
    ensure(mono.violations.iter().any(|v| v.events == ["{s2,s3}"]), || "mixed table misses {s2,s3}".into())?;
    let euc = complete_family(&model(DistanceSpec::Euclidean)).unwrap();
    ensure(!audit::check_dynamic_consistency(&euc).passed, || "euclidean table passed".into())?;
    Ok(format!("100 instances, {checks} predictions, no false verdicts"))
}

fn ratios_match(fitted: &DeltaSpec, truth: &DeltaSpec, prior: &Belief) -> Result<f64, String> {
    let f: Vec<f64> = prior.probs().iter().map(|&p| fitted.apply(p).unwrap()).collect();
    let t: Vec<f64> = prior.probs().iter().map(|&p| truth.apply(p).unwrap()).collect();
    let (fmax, tmax) = (f.iter().cloned().fold(0.0, f64::max), t.iter().cloned().fold(0.0, f64::max));
    let gap = f.iter().zip(&t).map(|(a, b)| (a / fmax - b / tmax).abs()).fold(0.0, f64::max);
    ensure(gap <= 1e-8, || format!("{truth:?}: scaled gap {gap:e}"))?;
    Ok(gap)
}

fn ac7() -> Outcome {
    let mut rng = common::rng(7);
    let mut worst: f64 = 0.0;
    for truth in [DeltaSpec::Power { alpha: 0.8 }, DeltaSpec::Sigmoid { a: 6.0, x0: 0.5 }] {
        for _ in 0..5 {
            let n = rng.gen_range(3..=5);
            let prior = common::distinct(&mut rng, n, 0.02, 1e-3);
            let m = IUModel::new(StateSpace::numbered(n).unwrap(), prior.clone(), DistanceSpec::distorted(truth.clone()))
                .unwrap();
            let fitted = fit_distortion(&complete_family(&m).unwrap()).map_err(|e| e.to_string())?;
            worst = worst.max(ratios_match(&fitted, &truth, &prior)?);
        }
    }
    let mut gamma_gap: f64 = 0.0;
    for gamma in [0.1, 0.3, 0.7] {
        for variant in ["bayesian_divergence", "euclidean", "distorted"] {
            let n = 4;
            let base = IUModel::new(
                StateSpace::numbered(n).unwrap(),
                common::interior(&mut rng, n, 0.02),
                common::distance(&mut rng, variant, n),
            )
            .unwrap();
            let fam = complete_family(&WIUModel::new(base, gamma).unwrap()).unwrap();
            let rec = recover_wiu(&fam).map_err(|e| format!("gamma {gamma} {variant}: {e}"))?;
            gamma_gap = gamma_gap.max((rec.gamma - gamma).abs());
            ensure((rec.gamma - gamma).abs() <= 1e-8, || format!("gamma {gamma} {variant}: got {}", rec.gamma))?;
        }
    }
    Ok(format!("distortion ratios within {worst:.1e}; gamma within {gamma_gap:.1e}"))
}

fn example_env(beta: f64, messages: usize) -> PersuasionEnv {
    let file = if messages == 2 { "persuasion_beta_2.json" } else { "persuasion_rich_beta_2.json" };
    let text = std::fs::read_to_string(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(file))
        .unwrap();
    let env: PersuasionEnv = serde_json::from_str(&text).unwrap();
    PersuasionEnv { f: DistortionFn::power(beta), ..env }
}

fn ac8() -> Outcome {
    let res = 0.005;
    let cases = [(0.5, [1.0, 4.0 / 9.0, 0.0], 1.0 / 3.0), (2.0, [1.0, 2.0 / 3.0, 1.0 / 3.0], 4.0 / 7.0)];
    for (beta, x, value) in cases {
        let env = example_env(beta, 2);
        let sol = optimize_binary(&env).map_err(|e| e.to_string())?;
        let gap = sol.signal.pi[0].iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(gap < 1e-9 && (sol.sender_value - value).abs() < 1e-9, || {
            format!("beta {beta}: signal {:?} value {}", sol.signal.pi[0], sol.sender_value)
        })?;
        let slack = persuasion_slack(&env, &sol.signal.pi[0]).unwrap();
        ensure(slack >= -CONSTRAINT_TOL, || format!("beta {beta}: slack {slack:e}"))?;
        let grid = grid_oracle(&env, res).map_err(|e| e.to_string())?;
        let g = persuasion::first_message_value(&env, &grid);
        ensure((g - value).abs() <= 2.0 * res, || format!("beta {beta}: grid value {g}"))?;
    }

    let mut rng = common::rng(8);
    for i in 0..50 {
        let n = rng.gen_range(3..=5);
        let concave = i % 2 == 0;
        let f = if concave { DistortionFn::power(rng.gen_range(0.3..0.95)) } else { DistortionFn::power(rng.gen_range(1.2..3.0)) };
        let env = common::persuasion_env(&mut rng, n, f, 2);
        let sol = optimize_binary(&env).map_err(|e| e.to_string())?;
        let opposed = env.opposed();
        let x = &sol.signal.pi[0];
        let interior = opposed.iter().filter(|&&i| x[i] > 1e-9 && x[i] < 1.0 - 1e-9).count();
        if concave {
            ensure(sol.regime == Regime::ConcaveVertex && interior <= 1, || {
                format!("concave env {i}: {interior} interior opposed coordinates")
            })?;
        } else {
            ensure(sol.regime == Regime::ConvexInterior && opposed.iter().all(|&i| x[i] > 0.0), || {
                format!("convex env {i}: opposed coordinate at zero: {x:?}")
            })?;
        }
    }

    let k = 2;
    let concave = optimize_rich(&example_env(0.5, 3), k).map_err(|e| e.to_string())?;
    let pi = &concave.signal.pi;
    ensure((pi[0][0] - 0.5).abs() < 1e-12 && (pi[1][0] - 0.5).abs() < 1e-12, || {
        format!("concave split of the aligned state: {:?}", [pi[0][0], pi[1][0]])
    })?;
    ensure(pi[1][1] == 0.0 && pi[0][1] > 0.0 && pi[0][1] < 1.0 && pi[0][2] == 0.0 && pi[1][2] == 0.0, || {
        format!("concave shape: {pi:?}")
    })?;
    let convex = optimize_rich(&example_env(2.0, 3), k).map_err(|e| e.to_string())?;
    let pi = &convex.signal.pi;
    ensure(pi[0][0] == 1.0 && pi[1][0] == 0.0, || format!("convex aligned state: {:?}", [pi[0][0], pi[1][0]]))?;
    for s in [1, 2] {
        ensure((pi[0][s] - pi[1][s]).abs() < 1e-12 && pi[0][s] > 0.0 && pi[0][s] < 1.0, || {
            format!("convex state {s} not equal interior: {pi:?}")
        })?;
    }
    Ok("example optima exact, grid within 2 steps, 50 structural checks, rich shapes hold".into())
}

fn ac9() -> Outcome {
    let mut rng = common::rng(9);
    let (mut passing, mut failing) = (0, 0);
    for i in 0..200 {
        let n = 3 + i % 2;
        let kind = common::VARIANTS[i % common::VARIANTS.len()];
        let m = IUModel::new(
            StateSpace::numbered(n).unwrap(),
            common::interior(&mut rng, n, 0.02),
            common::distance(&mut rng, kind, n),
        )
        .unwrap();
        let generated = complete_family(&m).unwrap();
        let fam: UpdateFamily = match i % 4 {
            0 | 1 => generated,
            2 => common::plant_cycle(&mut rng, &generated),
            _ => common::perturb_one(&mut rng, &generated),
        };
        let coherent = audit::check_dynamic_coherence(&fam).passed;
        let cert = rank_certificate(&fam);
        ensure(coherent == cert.is_ok(), || format!("family {i}: coherence {coherent}, certificate {cert:?}"))?;
        if i % 4 < 2 {
            ensure(coherent, || format!("generated family {i} failed coherence"))?;
        }
        if coherent {
            passing += 1
        } else {
            failing += 1
        }
    }
    ensure(failing >= 50, || format!("only {failing} incoherent families; corruption too weak"))?;
    Ok(format!("200 families agree ({passing} coherent, {failing} cyclic)"))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("AC1", "table reproduction", ac1),
        ("AC2", "solver matches closed forms", ac2),
        ("AC3", "divergence bounds", ac3),
        ("AC4", "ladder suite", ac4),
        ("AC5", "thresholded ladder to hypothesis testing", ac5),
        ("AC6", "axiom necessity sweep", ac6),
        ("AC7", "recovery round trips", ac7),
        ("AC8", "persuasion", ac8),
        ("AC9", "rank certificates iff coherence", ac9),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {title}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {id} {title}: {why} ({secs:.1}s)");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}


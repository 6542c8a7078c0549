//! Axiom audits on observed conditional beliefs, plus constructive recovery
//! of distortions, mixing weights and revealed-preference ranks.
//!
//! Every audit scans the whole family and reports all witnesses in canonical
//! event order. Preference axioms are checked through their belief-level
//! equivalents; acts never appear.

use std::collections::{BTreeMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::belief::{bayes_update, support, Belief, Event, NumericPolicy};
use crate::cps::check_cps;
use crate::distance::DeltaSpec;
use crate::error::{Error, Result};
use crate::family::UpdateFamily;
use crate::report::{AuditReport, Violation};

/// Relative tolerance for likelihood-ratio comparisons.
pub const RATIO_TOL: f64 = 1e-8;

fn policy() -> NumericPolicy {
    NumericPolicy::default()
}

fn label(fam: &UpdateFamily, s: usize) -> String {
    fam.space().labels()[s].clone()
}

fn non_null(fam: &UpdateFamily, e: Event) -> bool {
    fam.prior().mass(e) > policy().null_tol
}

/// Posterior mass outside the conditioning event.
pub fn check_consequentialism(fam: &UpdateFamily) -> AuditReport {
    let tol = policy().cmp_tol;
    let violations = fam
        .iter()
        .filter_map(|(e, b)| {
            let outside = 1.0 - b.mass(e);
            (outside > tol).then(|| {
                Violation::new("posterior puts mass outside the event")
                    .events([fam.name(e)])
                    .values([outside])
            })
        })
        .collect();
    AuditReport::new("consequentialism", violations)
}

/// Edge `B → A` whenever the posterior on `B` is supported inside `A`.
fn implication_graph(fam: &UpdateFamily) -> (Vec<Event>, Vec<Vec<usize>>) {
    let p = policy();
    let events: Vec<Event> = fam.events().collect();
    let supports: Vec<Option<Event>> = events
        .iter()
        .map(|&e| support(fam.get(e).expect("listed event"), &p).ok())
        .collect();
    let mut adj = vec![Vec::new(); events.len()];
    for (b, sp) in supports.iter().enumerate() {
        let Some(sp) = sp else { continue };
        for (a, &ea) in events.iter().enumerate() {
            if a != b && sp.is_subset_of(ea) {
                adj[b].push(a);
            }
        }
    }
    (events, adj)
}

/// Revealed implication must not cycle through distinct posteriors.
pub fn check_dynamic_coherence(fam: &UpdateFamily) -> AuditReport {
    let tol = policy().cmp_tol;
    let (events, adj) = implication_graph(fam);
    let mut g = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..events.len()).map(|i| g.add_node(i)).collect();
    for (b, targets) in adj.iter().enumerate() {
        for &a in targets {
            g.add_edge(nodes[b], nodes[a], ());
        }
    }
    let mut violations = Vec::new();
    let mut sccs: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|ix| g[ix]).collect();
            v.sort_unstable();
            v
        })
        .filter(|c| c.len() > 1)
        .collect();
    sccs.sort();
    for comp in sccs {
        let first = fam.get(events[comp[0]]).expect("listed event");
        let spread = comp
            .iter()
            .map(|&i| fam.get(events[i]).expect("listed event").sup_dist(first))
            .fold(0.0, f64::max);
        if spread > tol {
            violations.push(
                Violation::new("implication cycle joins events with different posteriors")
                    .events(comp.iter().map(|&i| fam.name(events[i])))
                    .values([spread]),
            );
        }
    }
    AuditReport::new("dynamic_coherence", violations)
}

/// State with the largest gap between two beliefs; earliest wins ties.
fn worst_state(a: &Belief, b: &Belief) -> usize {
    (0..a.len()).fold(0, |best, i| {
        if (a.get(i) - b.get(i)).abs() > (a.get(best) - b.get(best)).abs() {
            i
        } else {
            best
        }
    })
}

/// Posteriors on non-null events must be Bayesian.
pub fn check_dynamic_consistency(fam: &UpdateFamily) -> AuditReport {
    let p = policy();
    let mut violations = Vec::new();
    for (e, b) in fam.iter() {
        if !non_null(fam, e) {
            continue;
        }
        let bu = bayes_update(fam.prior(), e, &p).expect("non-null event");
        let gap = b.sup_dist(&bu);
        if gap > p.cmp_tol {
            let s = worst_state(b, &bu);
            violations.push(
                Violation::new("posterior differs from the Bayesian update")
                    .events([fam.name(e)])
                    .states([label(fam, s)])
                    .values([b.get(s), bu.get(s)]),
            );
        }
    }
    AuditReport::new("dynamic_consistency", violations)
}

/// Bayes within conditionals: `μ_A = BU(μ_E, A)` whenever `μ_E(A) > 0`.
pub fn check_conditional_consistency(fam: &UpdateFamily) -> AuditReport {
    let p = policy();
    let mut violations = Vec::new();
    for (e, pe) in fam.iter() {
        for (a, pa) in fam.iter() {
            if a == e || !a.is_subset_of(e) || pe.mass(a) <= p.null_tol {
                continue;
            }
            let bu = bayes_update(pe, a, &p).expect("positive mass");
            if pa.sup_dist(&bu) > p.cmp_tol {
                let s = worst_state(pa, &bu);
                violations.push(
                    Violation::new("conditional on the subevent is not the update of the larger conditional")
                        .events([fam.name(a), fam.name(e)])
                        .states([label(fam, s)])
                        .values([pa.get(s), bu.get(s)]),
                );
            }
        }
    }
    AuditReport::new("conditional_consistency", violations)
}

/// Equally likely states stay equally likely on non-null events.
pub fn check_consistency_axiom(fam: &UpdateFamily) -> AuditReport {
    let p = policy();
    let prior = fam.prior();
    let mut violations = Vec::new();
    for (e, b) in fam.iter() {
        if !non_null(fam, e) {
            continue;
        }
        let idx: Vec<usize> = e.iter().collect();
        for (x, &s) in idx.iter().enumerate() {
            for &t in &idx[x + 1..] {
                if (prior.get(s) - prior.get(t)).abs() <= p.null_tol
                    && (b.get(s) - b.get(t)).abs() > p.cmp_tol
                {
                    violations.push(
                        Violation::new("equally likely states are treated differently")
                            .events([fam.name(e)])
                            .states([label(fam, s), label(fam, t)])
                            .values([b.get(s), b.get(t)]),
                    );
                }
            }
        }
    }
    AuditReport::new("consistency", violations)
}

/// Likelihood ratios do not depend on the conditioning event.
pub fn check_iia(fam: &UpdateFamily) -> AuditReport {
    let p = policy();
    let full = Event::full(fam.n());
    let events: Vec<(Event, &Belief)> = fam
        .iter()
        .filter(|(e, _)| *e != full && non_null(fam, *e))
        .collect();
    let mut violations = Vec::new();
    for (x, &(e1, b1)) in events.iter().enumerate() {
        for &(e2, b2) in &events[x + 1..] {
            let Some(common) = e1.intersect(e2) else { continue };
            let idx: Vec<usize> = common.iter().collect();
            for (y, &s) in idx.iter().enumerate() {
                for &t in &idx[y + 1..] {
                    let vals = [b1.get(s), b1.get(t), b2.get(s), b2.get(t)];
                    if vals.iter().any(|v| *v <= p.null_tol) {
                        continue;
                    }
                    let r1 = vals[0] / vals[1];
                    let r2 = vals[2] / vals[3];
                    if (r1 - r2).abs() > RATIO_TOL * r1.abs().max(r2.abs()) {
                        violations.push(
                            Violation::new("likelihood ratio changes across events")
                                .events([fam.name(e1), fam.name(e2)])
                                .states([label(fam, s), label(fam, t)])
                                .values([r1, r2]),
                        );
                    }
                }
            }
        }
    }
    AuditReport::new("iia", violations)
}

/// The prior's likelihood ranking survives updating on non-null events.
pub fn check_monotonicity(fam: &UpdateFamily) -> AuditReport {
    let p = policy();
    let prior = fam.prior();
    let mut violations = Vec::new();
    for (e, b) in fam.iter() {
        if !non_null(fam, e) {
            continue;
        }
        let idx: Vec<usize> = e.iter().collect();
        for (x, &s) in idx.iter().enumerate() {
            for &t in &idx[x + 1..] {
                let weakly = |v: &Belief, i: usize, j: usize| v.get(i) - v.get(j) >= -p.cmp_tol;
                if weakly(prior, s, t) != weakly(b, s, t) || weakly(prior, t, s) != weakly(b, t, s) {
                    violations.push(
                        Violation::new("posterior reverses the prior ranking")
                            .events([fam.name(e)])
                            .states([label(fam, s), label(fam, t)])
                            .values([prior.get(s), prior.get(t), b.get(s), b.get(t)]),
                    );
                }
            }
        }
    }
    AuditReport::new("monotonicity", violations)
}

/// Every audit, in a fixed order.
pub fn run_all(fam: &UpdateFamily) -> Vec<AuditReport> {
    vec![
        check_consequentialism(fam),
        check_dynamic_coherence(fam),
        check_dynamic_consistency(fam),
        check_conditional_consistency(fam),
        check_consistency_axiom(fam),
        check_iia(fam),
        check_monotonicity(fam),
        check_cps(fam),
    ]
}

/// Key prior probabilities that coincide up to the null tolerance.
fn value_key(values: &mut Vec<f64>, v: f64) -> usize {
    let tol = policy().null_tol;
    match values.iter().position(|x| (x - v).abs() <= tol) {
        Some(i) => i,
        None => {
            values.push(v);
            values.len() - 1
        }
    }
}

/// Recover a distortion table that reproduces every non-null posterior.
pub fn fit_distortion(fam: &UpdateFamily) -> Result<DeltaSpec> {
    let p = policy();
    let prior = fam.prior();
    let mut values: Vec<f64> = Vec::new();
    let keys: Vec<usize> = prior.probs().iter().map(|&v| value_key(&mut values, v)).collect();
    let m = values.len();
    // Ratio edges between prior values, and values forced to zero.
    let mut edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut zero = vec![false; m];
    let mut positive = vec![false; m];
    for (e, b) in fam.iter() {
        if !non_null(fam, e) {
            continue;
        }
        let reference = e
            .iter()
            .max_by(|&i, &j| b.get(i).total_cmp(&b.get(j)))
            .expect("nonempty event");
        let qr = b.get(reference);
        for s in e.iter() {
            let q = b.get(s);
            if q <= p.null_tol {
                zero[keys[s]] = true;
                continue;
            }
            positive[keys[s]] = true;
            positive[keys[reference]] = true;
            edges[keys[reference]].push((keys[s], q / qr));
            edges[keys[s]].push((keys[reference], qr / q));
        }
    }
    if let Some(k) = (0..m).find(|&k| zero[k] && positive[k]) {
        return Err(Error::Inconsistent(format!(
            "prior probability {} maps to both zero and positive posterior mass",
            values[k]
        )));
    }

    // Propagate ratios across each connected component.
    let mut delta: Vec<Option<f64>> = vec![None; m];
    for root in 0..m {
        if delta[root].is_some() {
            continue;
        }
        if zero[root] {
            delta[root] = Some(0.0);
            continue;
        }
        delta[root] = Some(1.0);
        let mut component = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let du = delta[u].expect("visited");
            for &(v, r) in &edges[u] {
                let want = du * r;
                match delta[v] {
                    None => {
                        delta[v] = Some(want);
                        component.push(v);
                        queue.push_back(v);
                    }
                    Some(have) if (have - want).abs() > RATIO_TOL * have.abs().max(want.abs()) => {
                        return Err(Error::Inconsistent(format!(
                            "prior probability {} implies distortion ratios {have} and {want}",
                            values[v]
                        )));
                    }
                    Some(_) => {}
                }
            }
        }
        let top = component.iter().map(|&k| delta[k].unwrap_or(0.0)).fold(0.0, f64::max);
        for &k in &component {
            delta[k] = delta[k].map(|d| d / top);
        }
    }

    let mut points: Vec<(f64, f64)> = values
        .iter()
        .zip(&delta)
        .map(|(&v, d)| (v, d.expect("every value assigned")))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let table = DeltaSpec::Table { points };

    let distorted: Vec<f64> = prior.probs().iter().map(|&v| table.apply(v)).collect::<Result<_>>()?;
    for (e, b) in fam.iter() {
        if !non_null(fam, e) {
            continue;
        }
        let fitted = crate::belief::bayes_update_weights(&distorted, e, p.null_tol)
            .map_err(|_| Error::Inconsistent(format!("fitted table gives {} no mass", fam.name(e))))?;
        if fitted.sup_dist(b) > p.cmp_tol {
            return Err(Error::Inconsistent(format!(
                "fitted table misses the posterior on {} by {:e}",
                fam.name(e),
                fitted.sup_dist(b)
            )));
        }
    }
    Ok(table)
}

/// Mixing weight and consequentialist surrogates behind a weighted family.
#[derive(Debug, Clone, PartialEq)]
pub struct WiuRecovery {
    pub gamma: f64,
    pub per_event: Vec<(Event, f64)>,
    pub surrogates: UpdateFamily,
}

/// Recover `γ` and `μ*_E = (μ_E − γμ)/(1−γ)` from a weighted family.
pub fn recover_wiu(fam: &UpdateFamily) -> Result<WiuRecovery> {
    let p = policy();
    let prior = fam.prior();
    if prior.probs().iter().any(|&v| v <= p.null_tol) {
        return Err(Error::Precondition("prior must have full support".into()));
    }
    let full = Event::full(fam.n());
    let mut per_event = Vec::new();
    for (e, b) in fam.iter() {
        if e == full {
            continue;
        }
        if b.mass(e) < prior.mass(e) - p.cmp_tol {
            return Err(Error::Precondition(format!(
                "posterior on {} gives the event less mass than the prior",
                fam.name(e)
            )));
        }
        let gamma = (0..fam.n())
            .map(|s| b.get(s) / prior.get(s))
            .fold(f64::INFINITY, f64::min);
        per_event.push((e, gamma));
    }
    if per_event.is_empty() {
        return Err(Error::Precondition("no proper events to recover from".into()));
    }
    let lo = per_event.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let hi = per_event.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > RATIO_TOL {
        return Err(Error::GammaMismatch(
            per_event.iter().map(|(e, g)| (fam.name(*e), *g)).collect(),
        ));
    }
    let gamma = per_event.iter().map(|x| x.1).sum::<f64>() / per_event.len() as f64;
    if gamma >= 1.0 - p.cmp_tol {
        return Err(Error::Precondition("posteriors equal the prior; no reaction to recover".into()));
    }
    let mut surrogates = UpdateFamily::new(fam.space().clone(), prior.clone())?;
    for (e, b) in fam.iter() {
        let mut w: Vec<f64> = (0..fam.n())
            .map(|s| (b.get(s) - gamma * prior.get(s)) / (1.0 - gamma))
            .collect();
        for (s, v) in w.iter_mut().enumerate() {
            if !e.contains(s) {
                if v.abs() > p.cmp_tol {
                    return Err(Error::Inconsistent(format!(
                        "surrogate for {} keeps mass {v:e} outside the event",
                        fam.name(e)
                    )));
                }
                *v = 0.0;
            } else if *v < 0.0 && *v > -p.cmp_tol {
                *v = 0.0;
            }
        }
        surrogates.insert(e, Belief::from_weights(&w)?)?;
    }
    Ok(WiuRecovery { gamma, per_event, surrogates })
}

/// Integer levels that strictly increase along strict revealed preference:
/// whenever `μ_F` was feasible on `E` and differs from `μ_E`, the level of
/// `F` exceeds the level of `E`.
pub fn rank_certificate(fam: &UpdateFamily) -> Result<BTreeMap<Event, usize>> {
    let p = policy();
    let events: Vec<Event> = fam.events().collect();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for (i, &e) in events.iter().enumerate() {
        let pe = fam.get(e).expect("listed event");
        for (j, &f) in events.iter().enumerate() {
            if i == j {
                continue;
            }
            let pf = fam.get(f).expect("listed event");
            let Ok(sp) = support(pf, &p) else { continue };
            if sp.is_subset_of(e) {
                let strict = usize::from(pf.sup_dist(pe) > p.cmp_tol);
                edges.push((i, j, strict));
            }
        }
    }
    let mut level = vec![0usize; events.len()];
    let rounds = events.len() + 1;
    for _ in 0..rounds {
        let mut changed = false;
        for &(i, j, w) in &edges {
            if level[j] < level[i] + w {
                level[j] = level[i] + w;
                changed = true;
            }
        }
        if !changed {
            return Ok(events.into_iter().zip(level).collect());
        }
    }
    // Still relaxing after every simple path was exhausted: a strict cycle.
    let top = level.iter().copied().max().unwrap_or(0);
    let cycle = events
        .iter()
        .zip(&level)
        .filter(|(_, &l)| l + events.len() >= top)
        .map(|(&e, _)| fam.name(e))
        .collect();
    Err(Error::CycleFound(cycle))
}

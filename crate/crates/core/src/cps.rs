//! Complete updating rules built from ordered belief ladders.
//!
//! A [`Ladder`] lists beliefs `μ^0 … μ^K`; an event is conditioned on the
//! first level that gives it enough mass. With threshold zero and disjoint
//! supports this is a conditional probability system; with a positive
//! threshold it is the ε-variant. [`HTModel`] is the hypothesis-testing rule:
//! Bayes when the prior is not surprised, otherwise a maximum-likelihood pick
//! among weighted atoms. [`ht_from_ecps`] turns any ε-ladder into an
//! equivalent hypothesis-testing model.

use petgraph::algo::toposort;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::belief::{bayes_update, check_len, support, Belief, Event, NumericPolicy, StateSpace};
use crate::distance::{bayesian_function_clipped, SigmaSpec};
use crate::error::{Error, Result};
use crate::family::UpdateFamily;
use crate::model::UpdateRule;
use crate::report::{AuditReport, Violation};
use crate::solver::{minimize_objective, SolverConfig};

/// Largest state space for exhaustive event sweeps.
const SWEEP_LIMIT: usize = 16;

/// Ordered list of beliefs over a common state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    space: StateSpace,
    levels: Vec<Belief>,
}

impl Ladder {
    pub fn new(space: StateSpace, levels: Vec<Belief>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidLadder("no levels".into()));
        }
        for l in &levels {
            check_len(space.len(), l.len())?;
        }
        Ok(Self { space, levels })
    }

    /// A ladder whose supports partition the state space.
    pub fn partition(space: StateSpace, levels: Vec<Belief>) -> Result<Self> {
        let l = Self::new(space, levels)?;
        l.check_partition(&NumericPolicy::default())?;
        Ok(l)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn levels(&self) -> &[Belief] {
        &self.levels
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    /// Supports must be pairwise disjoint and cover every state.
    pub fn check_partition(&self, policy: &NumericPolicy) -> Result<()> {
        let mut covered: Option<Event> = None;
        for (k, l) in self.levels.iter().enumerate() {
            let sp = support(l, policy)?;
            if let Some(c) = covered {
                if c.intersect(sp).is_some() {
                    return Err(Error::InvalidLadder(format!(
                        "level {k} overlaps the supports of earlier levels"
                    )));
                }
            }
            covered = Some(covered.map_or(sp, |c| c.union(sp)));
        }
        if covered != Some(Event::full(self.n())) {
            return Err(Error::InvalidLadder("supports do not cover every state".into()));
        }
        Ok(())
    }

    /// Every state must be reachable: some level gives it mass above `eps`.
    pub fn check_reachable(&self, eps: f64) -> Result<()> {
        check_epsilon(eps)?;
        for s in 0..self.n() {
            if !self.levels.iter().any(|l| l.get(s) > eps) {
                return Err(Error::InvalidLadder(format!(
                    "state {} gets mass above {eps} at no level",
                    self.space.labels()[s]
                )));
            }
        }
        Ok(())
    }

    /// Least level giving `e` mass above the threshold.
    pub fn level_for(&self, eps: f64, e: Event) -> Option<usize> {
        let cut = eps.max(NumericPolicy::default().null_tol);
        self.levels.iter().position(|l| l.mass(e) > cut)
    }

    pub fn to_file(&self, epsilon: Option<f64>) -> LadderFile {
        LadderFile {
            states: self.space.labels().to_vec(),
            levels: self.levels.clone(),
            epsilon,
        }
    }

    pub fn from_file(file: LadderFile) -> Result<(Self, f64)> {
        let eps = file.epsilon.unwrap_or(0.0);
        check_epsilon(eps)?;
        let l = Self::new(StateSpace::new(file.states)?, file.levels)?;
        if eps == 0.0 {
            l.check_partition(&NumericPolicy::default())?;
        }
        Ok((l, eps))
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon {eps} not in [0,1)")))
    }
}

/// JSON layout of a ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderFile {
    pub states: Vec<String>,
    pub levels: Vec<Belief>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// Conditional-probability-system posterior.
pub fn cps_posterior(l: &Ladder, e: Event) -> Result<Belief> {
    ecps_posterior(l, 0.0, e)
}

/// Posterior from the first level giving `e` mass above `eps`.
pub fn ecps_posterior(l: &Ladder, eps: f64, e: Event) -> Result<Belief> {
    check_epsilon(eps)?;
    let k = l
        .level_for(eps, e)
        .ok_or_else(|| Error::Unreachable(l.space.format_event(e)))?;
    bayes_update(&l.levels[k], e, &NumericPolicy::default())
}

/// An ε-ladder viewed as an updating rule.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonCps {
    pub ladder: Ladder,
    pub epsilon: f64,
}

impl UpdateRule for EpsilonCps {
    fn space(&self) -> &StateSpace {
        &self.ladder.space
    }
    fn prior(&self) -> &Belief {
        &self.ladder.levels[0]
    }
    fn update(&self, e: Event) -> Result<Belief> {
        ecps_posterior(&self.ladder, self.epsilon, e)
    }
}

impl UpdateRule for Ladder {
    fn space(&self) -> &StateSpace {
        &self.space
    }
    fn prior(&self) -> &Belief {
        &self.levels[0]
    }
    fn update(&self, e: Event) -> Result<Belief> {
        cps_posterior(self, e)
    }
}

/// Hypothesis-testing model: prior, weighted atoms and a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct HTModel {
    space: StateSpace,
    prior: Belief,
    atoms: Vec<(Belief, f64)>,
    epsilon: f64,
}

/// Which branch produced an HT posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct HtChoice {
    pub posterior: Belief,
    /// Index of the selected atom, `None` on the Bayesian branch.
    pub atom: Option<usize>,
    /// Another atom attained the same likelihood product.
    pub tie: bool,
}

/// Relative slack under which two likelihood products count as tied.
const TIE_TOL: f64 = 1e-12;

impl HTModel {
    pub fn new(space: StateSpace, prior: Belief, atoms: Vec<(Belief, f64)>, epsilon: f64) -> Result<Self> {
        check_len(space.len(), prior.len())?;
        check_epsilon(epsilon)?;
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("second-order prior has no atoms".into()));
        }
        for (b, w) in &atoms {
            check_len(space.len(), b.len())?;
            if !(*w > 0.0) {
                return Err(Error::InvalidParameter(format!("atom weight {w} must be positive")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("atom weights sum to {total}")));
        }
        let tol = NumericPolicy::default().cmp_tol;
        let top = atoms.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max);
        let at_top: Vec<&Belief> = atoms.iter().filter(|a| a.1 == top).map(|a| &a.0).collect();
        if at_top.len() != 1 || !at_top[0].approx_eq(&prior, tol) {
            return Err(Error::InvalidParameter(
                "prior must be the unique heaviest atom".into(),
            ));
        }
        Ok(Self { space, prior, atoms, epsilon })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }
    pub fn atoms(&self) -> &[(Belief, f64)] {
        &self.atoms
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn to_file(&self) -> HtFile {
        HtFile {
            states: self.space.labels().to_vec(),
            prior: self.prior.clone(),
            atoms: self
                .atoms
                .iter()
                .map(|(b, w)| HtAtom { belief: b.clone(), weight: *w })
                .collect(),
            epsilon: self.epsilon,
        }
    }

    pub fn from_file(file: HtFile) -> Result<Self> {
        Self::new(
            StateSpace::new(file.states)?,
            file.prior,
            file.atoms.into_iter().map(|a| (a.belief, a.weight)).collect(),
            file.epsilon,
        )
    }
}

impl UpdateRule for HTModel {
    fn space(&self) -> &StateSpace {
        &self.space
    }
    fn prior(&self) -> &Belief {
        &self.prior
    }
    fn update(&self, e: Event) -> Result<Belief> {
        ht_posterior(self, e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HtFile {
    pub states: Vec<String>,
    pub prior: Belief,
    pub atoms: Vec<HtAtom>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HtAtom {
    pub belief: Belief,
    pub weight: f64,
}

/// HT posterior with branch and tie information.
pub fn ht_select(h: &HTModel, e: Event) -> Result<HtChoice> {
    let policy = NumericPolicy::default();
    if h.prior.mass(e) > h.epsilon.max(policy.null_tol) {
        return Ok(HtChoice {
            posterior: bayes_update(&h.prior, e, &policy)?,
            atom: None,
            tie: false,
        });
    }
    let mut best: Option<(usize, f64)> = None;
    let mut tie = false;
    for (i, (b, w)) in h.atoms.iter().enumerate() {
        let m = b.mass(e);
        if m <= policy.null_tol {
            continue;
        }
        let p = w * m;
        match best {
            None => best = Some((i, p)),
            Some((_, bp)) if p > bp * (1.0 + TIE_TOL) => {
                best = Some((i, p));
                tie = false;
            }
            Some((_, bp)) if p >= bp * (1.0 - TIE_TOL) => tie = true,
            _ => {}
        }
    }
    let (i, _) = best.ok_or_else(|| Error::Unreachable(h.space.format_event(e)))?;
    Ok(HtChoice {
        posterior: bayes_update(&h.atoms[i].0, e, &policy)?,
        atom: Some(i),
        tie,
    })
}

/// Hypothesis-testing posterior.
pub fn ht_posterior(h: &HTModel, e: Event) -> Result<Belief> {
    ht_select(h, e).map(|c| c.posterior)
}

/// Check `μ_E(s) = μ_F(s)·μ_E(F)` for every `s ∈ F ⊆ E` present in the family.
pub fn check_cps(fam: &UpdateFamily) -> AuditReport {
    check_cps_named(fam, "cps")
}

pub(crate) fn check_cps_named(fam: &UpdateFamily, axiom: &str) -> AuditReport {
    let tol = NumericPolicy::default().cmp_tol;
    let mut violations = Vec::new();
    let mut pairs = 0usize;
    for (e, pe) in fam.iter() {
        for (f, pf) in fam.iter() {
            if !f.is_subset_of(e) {
                continue;
            }
            pairs += 1;
            let pe_f = pe.mass(f);
            for s in f.iter() {
                let lhs = pe.get(s);
                let rhs = pf.get(s) * pe_f;
                if (lhs - rhs).abs() > tol {
                    violations.push(
                        Violation::new("conditional of E on F disagrees with the chained conditional")
                            .events([fam.name(f), fam.name(e)])
                            .states([fam.space().labels()[s].clone()])
                            .values([lhs, pf.get(s), pe_f]),
                    );
                }
            }
        }
    }
    let mut report = AuditReport::new(axiom, violations).with_note(format!("{pairs} nested pairs checked"));
    if fam.n() < 32 && !fam.is_complete() {
        let total = (1usize << fam.n()) - 1;
        report = report.with_note(format!(
            "coverage gap: {} of {total} events present; pairs involving absent events were not tested",
            fam.len()
        ));
    }
    report
}

/// Recover the ladder behind a complete CPS family.
pub fn ladder_from_family(fam: &UpdateFamily) -> Result<Ladder> {
    let report = check_cps(fam);
    if let Some(v) = report.violations.first() {
        return Err(Error::NotCps(format!(
            "state {} with F={} E={}: {:?}",
            v.states.join(","),
            v.events[0],
            v.events[1],
            v.values
        )));
    }
    let policy = NumericPolicy::default();
    let mut remaining = Some(Event::full(fam.n()));
    let mut levels = Vec::new();
    while let Some(sk) = remaining {
        let mu = fam.get(sk).ok_or_else(|| Error::MissingEvent(fam.name(sk)))?;
        let sp = support(mu, &policy)?;
        if !sp.is_subset_of(sk) {
            return Err(Error::NotCps(format!(
                "posterior on {} puts mass outside the event",
                fam.name(sk)
            )));
        }
        levels.push(mu.clone());
        remaining = sk.difference(sp);
    }
    Ladder::new(fam.space().clone(), levels)
}

/// Distance whose minimizer over every `Δ(E)` is the CPS posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct CpsDistance {
    levels: Vec<Belief>,
    sigma: SigmaSpec,
    null_tol: f64,
}

/// Build the CPS distance for a partition ladder.
pub fn cps_distance(l: &Ladder, sigma: SigmaSpec) -> Result<CpsDistance> {
    sigma.validate()?;
    let policy = NumericPolicy::default();
    l.check_partition(&policy)?;
    Ok(CpsDistance {
        levels: l.levels.clone(),
        sigma,
        null_tol: policy.null_tol,
    })
}

impl CpsDistance {
    /// `β^σ(μ^{k*}, π) + k*·(σ(1) + |σ(0)|)` with `k*` the first level
    /// reaching the support of `π`.
    pub fn eval(&self, y: &[f64]) -> f64 {
        let k = self
            .levels
            .iter()
            .position(|l| {
                l.probs()
                    .iter()
                    .zip(y)
                    .filter(|(_, yi)| **yi > self.null_tol)
                    .map(|(p, _)| p)
                    .sum::<f64>()
                    > self.null_tol
            })
            .unwrap_or(self.levels.len());
        let anchor = self.levels.get(k).unwrap_or(&self.levels[self.levels.len() - 1]);
        bayesian_function_clipped(anchor.probs(), y, &self.sigma) + k as f64 * self.sigma.gap()
    }

    /// Minimize over `Δ(E)` with the generic solver.
    pub fn minimize(&self, e: Event, cfg: &SolverConfig) -> Result<Belief> {
        let n = self.levels[0].len();
        let sol = minimize_objective(|y| self.eval(y), n, e, cfg, None)?;
        Belief::from_weights(&sol.x)
    }
}

/// Result of the ε-ladder to hypothesis-testing construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HtConstruction {
    pub model: HTModel,
    /// Ladder level each atom came from, aligned with the model's atoms.
    pub atom_levels: Vec<usize>,
    /// Ratio between weights of consecutive ranks is `ratio^(1/atoms)`.
    pub ratio: f64,
    /// Events checked in the verification sweep.
    pub events_checked: usize,
    /// Events no level reaches; the ladder rule is undefined there.
    pub unreachable: Vec<Event>,
}

struct Atom {
    belief: Belief,
    level: usize,
    events: Vec<Event>,
}

/// Build an HT model equivalent to the ε-ladder rule on every event.
pub fn ht_from_ecps(l: &Ladder, eps: f64) -> Result<HtConstruction> {
    check_epsilon(eps)?;
    let n = l.n();
    if n > SWEEP_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "construction sweeps every event; {n} states exceeds {SWEEP_LIMIT}"
        )));
    }
    if eps == 0.0 {
        l.check_partition(&NumericPolicy::default())?;
    }
    let policy = NumericPolicy::default();
    let tol = policy.cmp_tol;
    let mut events = Vec::new();
    let mut unreachable = Vec::new();
    let mut conditioned = Vec::new();
    for e in Event::all_nonempty(n) {
        match l.level_for(eps, e) {
            Some(k) => {
                events.push(e);
                conditioned.push((e, k, bayes_update(&l.levels[k], e, &policy)?));
            }
            None => unreachable.push(e),
        }
    }
    if events.is_empty() {
        return Err(Error::Unreachable("every event".into()));
    }

    // Probability the top-level atoms give to events handled at deeper levels.
    let mut threshold: f64 = 0.0;
    for (e, k, _) in &conditioned {
        for (_, j, b) in &conditioned {
            if j < k {
                threshold = threshold.max(b.mass(*e));
            }
        }
    }
    if threshold >= 1.0 {
        return Err(Error::ConstructionFailed(format!(
            "threshold {threshold} is not below 1"
        )));
    }

    // Atoms: the prior plus one per event that the prior does not settle.
    let prior = l.levels[0].clone();
    let mut atoms = vec![Atom {
        belief: prior.clone(),
        level: 0,
        events: vec![Event::full(n)],
    }];
    for (e, k, b) in conditioned {
        if prior.mass(e) > threshold.max(policy.null_tol) {
            continue;
        }
        match atoms.iter_mut().find(|a| a.belief.approx_eq(&b, tol)) {
            Some(a) => {
                a.level = a.level.min(k);
                a.events.push(e);
            }
            None => atoms.push(Atom { belief: b, level: k, events: vec![e] }),
        }
    }

    // Within a level, an atom must outweigh every other atom that is sure of
    // one of its events.
    let mut order: Vec<usize> = Vec::with_capacity(atoms.len());
    let max_level = atoms.iter().map(|a| a.level).max().unwrap_or(0);
    for level in 0..=max_level {
        let members: Vec<usize> = (0..atoms.len()).filter(|&i| atoms[i].level == level).collect();
        let mut g = DiGraph::<usize, ()>::new();
        let nodes: Vec<_> = members.iter().map(|&i| g.add_node(i)).collect();
        for (a, &ia) in members.iter().enumerate() {
            for (b, &ib) in members.iter().enumerate() {
                if a != b && atoms[ia].events.iter().any(|&e| atoms[ib].belief.mass(e) >= 1.0 - tol) {
                    g.add_edge(nodes[a], nodes[b], ());
                }
            }
        }
        let sorted = toposort(&g, None).map_err(|c| {
            Error::ConstructionFailed(format!(
                "support-refinement cycle at level {level} through atom {}",
                g[c.node_id()]
            ))
        })?;
        order.extend(sorted.into_iter().map(|ix| g[ix]));
    }

    // Largest sub-unit mass any atom gives any event sets the weight ratio.
    let mut r_star: f64 = threshold;
    for a in &atoms {
        for &e in &events {
            let m = a.belief.mass(e);
            if m < 1.0 - tol {
                r_star = r_star.max(m);
            }
        }
    }
    let ratio = if r_star > 0.0 { 1.0 / r_star } else { 2.0 };
    let count = order.len() as f64;
    let raw: Vec<f64> = (0..order.len()).map(|r| ratio.powf(-(r as f64) / count)).collect();
    let total: f64 = raw.iter().sum();
    let atom_list: Vec<(Belief, f64)> = order
        .iter()
        .zip(&raw)
        .map(|(&i, w)| (atoms[i].belief.clone(), w / total))
        .collect();
    let atom_levels = order.iter().map(|&i| atoms[i].level).collect();
    let model = HTModel::new(l.space.clone(), prior, atom_list, threshold)?;

    for &e in &events {
        let want = ecps_posterior(l, eps, e)?;
        let got = ht_select(&model, e)?;
        if got.tie || !got.posterior.approx_eq(&want, tol) {
            return Err(Error::ConstructionFailed(format!(
                "geometric weights do not reproduce the ladder on {} (tie: {})",
                l.space.format_event(e),
                got.tie
            )));
        }
    }
    Ok(HtConstruction {
        model,
        atom_levels,
        ratio,
        events_checked: events.len(),
        unreachable,
    })
}

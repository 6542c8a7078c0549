//! Inertial and weighted inertial updating models.

use rayon::prelude::*;

use crate::belief::{check_len, Belief, Event, NumericPolicy, StateSpace};
use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::family::UpdateFamily;
use crate::solver::{self, SolverConfig};

/// Anything that maps events to posteriors over a fixed state space.
pub trait UpdateRule: Sync {
    fn space(&self) -> &StateSpace;
    fn prior(&self) -> &Belief;
    fn update(&self, e: Event) -> Result<Belief>;
}

/// A prior bound to a subjective distance.
#[derive(Debug, Clone, PartialEq)]
pub struct IUModel {
    pub space: StateSpace,
    pub prior: Belief,
    pub distance: DistanceSpec,
    pub policy: NumericPolicy,
    pub solver: SolverConfig,
}

impl IUModel {
    pub fn new(space: StateSpace, prior: Belief, distance: DistanceSpec) -> Result<Self> {
        Self::with_policy(space, prior, distance, NumericPolicy::default())
    }

    pub fn with_policy(
        space: StateSpace,
        prior: Belief,
        distance: DistanceSpec,
        policy: NumericPolicy,
    ) -> Result<Self> {
        check_len(space.len(), prior.len())?;
        distance.validate_for(&prior, &policy)?;
        Ok(Self {
            space,
            prior,
            distance,
            policy,
            solver: SolverConfig::default(),
        })
    }
}

impl UpdateRule for IUModel {
    fn space(&self) -> &StateSpace {
        &self.space
    }
    fn prior(&self) -> &Belief {
        &self.prior
    }
    fn update(&self, e: Event) -> Result<Belief> {
        iu_posterior(self, e)
    }
}

/// Weighted inertial updating: a fixed share of the prior survives.
#[derive(Debug, Clone, PartialEq)]
pub struct WIUModel {
    pub base: IUModel,
    pub gamma: f64,
}

impl WIUModel {
    pub fn new(base: IUModel, gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("gamma {gamma} not in [0,1)")));
        }
        Ok(Self { base, gamma })
    }
}

impl UpdateRule for WIUModel {
    fn space(&self) -> &StateSpace {
        &self.base.space
    }
    fn prior(&self) -> &Belief {
        &self.base.prior
    }
    fn update(&self, e: Event) -> Result<Belief> {
        wiu_posterior(self, e)
    }
}

/// Distance-minimizing posterior on `e`.
pub fn iu_posterior(m: &IUModel, e: Event) -> Result<Belief> {
    solver::posterior(&m.distance, &m.prior, e, &m.solver, &m.policy)
}

/// `γ·prior + (1−γ)·iu_posterior`.
pub fn wiu_posterior(m: &WIUModel, e: Event) -> Result<Belief> {
    let inner = iu_posterior(&m.base, e)?;
    m.base.prior.mix(&inner, m.gamma)
}

/// Evaluate `rule` on every event; failures are collected, not fail-fast.
pub fn update_family<R: UpdateRule + ?Sized>(rule: &R, events: &[Event]) -> Result<UpdateFamily> {
    if events.is_empty() {
        return Err(Error::InvalidParameter("no events to update on".into()));
    }
    let results: Vec<(Event, Result<Belief>)> =
        events.par_iter().map(|&e| (e, rule.update(e))).collect();
    let mut fam = UpdateFamily::new(rule.space().clone(), rule.prior().clone())?;
    let mut failures = Vec::new();
    for (e, r) in results {
        match r {
            Ok(b) => fam.insert(e, b)?,
            Err(err) => failures.push((rule.space().format_event(e), err)),
        }
    }
    if failures.is_empty() {
        Ok(fam)
    } else {
        Err(Error::Family(failures))
    }
}

/// Evaluate `rule` on every nonempty event.
pub fn complete_family<R: UpdateRule + ?Sized>(rule: &R) -> Result<UpdateFamily> {
    let events: Vec<Event> = Event::all_nonempty(rule.space().len()).collect();
    update_family(rule, &events)
}

/// Every event with exactly `k` states.
pub fn events_of_size(n: usize, k: usize) -> Vec<Event> {
    Event::all_nonempty(n).filter(|e| e.len() == k).collect()
}

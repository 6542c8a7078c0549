//! Finite state spaces, events and beliefs.
//!
//! A [`Belief`] is a probability vector over a [`StateSpace`]; an [`Event`] is a
//! nonempty set of state indices stored as a bitmask, so event equality and
//! ordering are structural. Everything here is an immutable value.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported state space (events are 64-bit masks).
pub const MAX_STATES: usize = 64;

/// Tolerances used to decide nullity, solver convergence and belief equality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    /// Mass at or below which an event is treated as null.
    pub null_tol: f64,
    /// Convergence threshold for the generic solver.
    pub solve_tol: f64,
    /// Sup-norm tolerance for comparing beliefs.
    pub cmp_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            null_tol: 1e-12,
            solve_tol: 1e-10,
            cmp_tol: 1e-9,
        }
    }
}

impl NumericPolicy {
    pub fn new(null_tol: f64, solve_tol: f64, cmp_tol: f64) -> Result<Self> {
        if !(null_tol > 0.0 && null_tol <= cmp_tol && solve_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "numeric policy requires 0 < null_tol <= cmp_tol and solve_tol > 0 \
                 (got {null_tol}, {solve_tol}, {cmp_tol})"
            )));
        }
        Ok(Self {
            null_tol,
            solve_tol,
            cmp_tol,
        })
    }
}

/// Ordered list of distinct state labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidStateSpace("no states".into()));
        }
        if labels.len() > MAX_STATES {
            return Err(Error::InvalidStateSpace(format!(
                "{} states exceeds the limit of {MAX_STATES}",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.contains(',') {
                return Err(Error::InvalidStateSpace(format!(
                    "label {l:?} must be nonempty and comma-free"
                )));
            }
            if labels[..i].contains(l) {
                return Err(Error::InvalidStateSpace(format!("duplicate label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// States named `s1, …, sn`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("s{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidEvent(format!("unknown state {label:?}")))
    }

    pub fn full_event(&self) -> Event {
        Event::full(self.len())
    }

    /// Resolve a list of labels into an event.
    pub fn event<S: AsRef<str>>(&self, labels: &[S]) -> Result<Event> {
        let idx = labels
            .iter()
            .map(|l| self.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Event::new(&idx, self.len())
    }

    /// Parse a comma separated label list such as `s1,s2`.
    pub fn parse_event(&self, text: &str) -> Result<Event> {
        let parts: Vec<&str> = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        self.event(&parts)
    }

    pub fn event_labels(&self, e: Event) -> Vec<String> {
        e.iter().map(|i| self.labels[i].clone()).collect()
    }

    /// `{s1,s2}` style rendering.
    pub fn format_event(&self, e: Event) -> String {
        format!("{{{}}}", self.event_labels(e).join(","))
    }
}

impl TryFrom<Vec<String>> for StateSpace {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        StateSpace::new(v)
    }
}

impl From<StateSpace> for Vec<String> {
    fn from(s: StateSpace) -> Self {
        s.labels
    }
}

/// Nonempty set of state indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event(u64);

impl Event {
    pub fn new(indices: &[usize], n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidEvent("empty event".into()));
        }
        let mut mask = 0u64;
        for &i in indices {
            if i >= n || i >= MAX_STATES {
                return Err(Error::InvalidEvent(format!(
                    "state index {i} out of range for {n} states"
                )));
            }
            mask |= 1 << i;
        }
        Ok(Self(mask))
    }

    /// Build from a raw mask; `None` if the mask is empty or exceeds `n`.
    pub fn from_mask(mask: u64, n: usize) -> Option<Self> {
        let limit = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        (mask != 0 && mask & !limit == 0).then_some(Self(mask))
    }

    pub fn full(n: usize) -> Self {
        assert!((1..=MAX_STATES).contains(&n));
        if n == 64 {
            Self(u64::MAX)
        } else {
            Self((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_STATES);
        Self(1 << i)
    }

    /// Every nonempty event over `n` states, in mask order.
    pub fn all_nonempty(n: usize) -> impl Iterator<Item = Event> {
        assert!(n < 32, "exhaustive enumeration limited to small spaces");
        (1u64..(1u64 << n)).map(Event)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_STATES && self.0 & (1 << i) != 0
    }

    pub fn is_subset_of(self, other: Event) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: Event) -> Option<Event> {
        let m = self.0 & other.0;
        (m != 0).then_some(Event(m))
    }

    pub fn union(self, other: Event) -> Event {
        Event(self.0 | other.0)
    }

    pub fn difference(self, other: Event) -> Option<Event> {
        let m = self.0 & !other.0;
        (m != 0).then_some(Event(m))
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_STATES).filter(move |&i| self.0 & (1 << i) != 0)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.iter().map(|i| format!("s{}", i + 1)).collect();
        write!(f, "{{{}}}", idx.join(","))
    }
}

/// Probability vector over a finite state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    probs: Vec<f64>,
}

/// Sum deviation below which a vector is silently renormalized.
const RENORMALIZE_TOL: f64 = 1e-9;

impl Belief {
    /// Validate and (for tiny drift only) renormalize a probability vector.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidBelief("empty vector".into()));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -1e-12 {
                return Err(Error::InvalidBelief(format!("entry {p} is not a probability")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::InvalidBelief(format!("entries sum to {sum}, not 1")));
        }
        if sum != 1.0 {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(Self { probs })
    }

    /// Normalize an arbitrary nonnegative weight vector.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidBelief(format!(
                "weights {weights:?} cannot be normalized"
            )));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, i: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        Self { probs }
    }

    /// Uniform belief over the states of `e`.
    pub fn uniform_on(n: usize, e: Event) -> Self {
        let k = e.len() as f64;
        let probs = (0..n).map(|i| if e.contains(i) { 1.0 / k } else { 0.0 }).collect();
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn mass(&self, e: Event) -> f64 {
        event_mass(self, e)
    }

    /// Sup-norm distance to another belief of the same length.
    pub fn sup_dist(&self, other: &Belief) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Belief, tol: f64) -> bool {
        self.len() == other.len() && self.sup_dist(other) <= tol
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Belief, w: f64) -> Result<Belief> {
        check_len(self.len(), other.len())?;
        Belief::new(
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| w * a + (1.0 - w) * b)
                .collect(),
        )
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Belief::new(v)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Self {
        b.probs
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, got })
    }
}

/// Indices carrying more than `null_tol` probability.
pub fn support(b: &Belief, policy: &NumericPolicy) -> Result<Event> {
    let idx: Vec<usize> = (0..b.len()).filter(|&i| b.get(i) > policy.null_tol).collect();
    if idx.is_empty() {
        return Err(Error::EmptySupport);
    }
    Event::new(&idx, b.len())
}

/// Total probability of `e`.
pub fn event_mass(b: &Belief, e: Event) -> f64 {
    e.iter().filter(|&i| i < b.len()).map(|i| b.get(i)).sum()
}

/// Mass of `e` under an arbitrary nonnegative weight vector.
pub(crate) fn weight_mass(w: &[f64], e: Event) -> f64 {
    e.iter().filter(|&i| i < w.len()).map(|i| w[i]).sum()
}

/// Bayesian update of `b` on `e`.
pub fn bayes_update(b: &Belief, e: Event, policy: &NumericPolicy) -> Result<Belief> {
    bayes_update_weights(b.probs(), e, policy.null_tol)
}

/// Bayes' rule applied to an unnormalized weight vector.
pub(crate) fn bayes_update_weights(w: &[f64], e: Event, null_tol: f64) -> Result<Belief> {
    if e.iter().any(|i| i >= w.len()) {
        return Err(Error::InvalidEvent(format!("{e} exceeds {} states", w.len())));
    }
    let mass = weight_mass(w, e);
    if !(mass > null_tol) {
        return Err(Error::NullEvent { mass });
    }
    let probs = (0..w.len())
        .map(|i| if e.contains(i) { w[i] / mass } else { 0.0 })
        .collect();
    Belief::new(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn mu() -> Belief {
        Belief::new(vec![12.0 / 20.0, 7.0 / 20.0, 1.0 / 20.0]).unwrap()
    }

    #[test]
    fn support_examples() {
        let p = NumericPolicy::default();
        let b = Belief::new(vec![0.6, 0.35, 0.05]).unwrap();
        assert_eq!(support(&b, &p).unwrap(), Event::full(3));
        let b = Belief::point_mass(3, 0);
        assert_eq!(support(&b, &p).unwrap(), Event::singleton(0));
        let b = Belief::new(vec![0.5, 0.5, 1e-15]).unwrap();
        assert_eq!(support(&b, &p).unwrap(), Event::new(&[0, 1], 3).unwrap());
    }

    #[test]
    fn support_of_all_tiny_is_empty() {
        let p = NumericPolicy::new(0.6, 1e-10, 0.6).unwrap();
        let b = Belief::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(support(&b, &p), Err(Error::EmptySupport));
    }

    #[test]
    fn bayes_update_table() {
        let p = NumericPolicy::default();
        let post = bayes_update(&mu(), Event::new(&[0, 1], 3).unwrap(), &p).unwrap();
        assert_abs_diff_eq!(post.get(0), 0.63, epsilon = 5e-3);
        assert_abs_diff_eq!(post.get(1), 0.37, epsilon = 5e-3);
        assert_eq!(post.get(2), 0.0);
        let post = bayes_update(&mu(), Event::new(&[1, 2], 3).unwrap(), &p).unwrap();
        assert_abs_diff_eq!(post.get(1), 0.875, epsilon = 1e-12);
        assert_abs_diff_eq!(post.get(2), 0.125, epsilon = 1e-12);
        let post = bayes_update(&mu(), Event::full(3), &p).unwrap();
        assert!(post.approx_eq(&mu(), 1e-15));
    }

    #[test]
    fn bayes_update_null_event() {
        let p = NumericPolicy::default();
        let b = Belief::point_mass(3, 0);
        let err = bayes_update(&b, Event::new(&[1, 2], 3).unwrap(), &p).unwrap_err();
        assert!(matches!(err, Error::NullEvent { .. }));
    }

    #[test]
    fn event_mass_examples() {
        let b = Belief::new(vec![0.6, 0.35, 0.05]).unwrap();
        assert_abs_diff_eq!(event_mass(&b, Event::new(&[1, 2], 3).unwrap()), 0.4, epsilon = 1e-15);
        let b = Belief::point_mass(3, 0);
        assert_eq!(event_mass(&b, Event::new(&[1, 2], 3).unwrap()), 0.0);
        let b = Belief::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(event_mass(&b, Event::full(3)), 1.0);
    }

    #[test]
    fn belief_construction_policy() {
        let b = Belief::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert_eq!(b.probs().iter().sum::<f64>(), 1.0);
        assert!(Belief::new(vec![0.5, 0.6]).is_err());
        assert!(Belief::new(vec![1.5, -0.5]).is_err());
        assert!(Belief::new(vec![]).is_err());
    }

    #[test]
    fn state_space_rules() {
        assert!(StateSpace::new(["a", "a"]).is_err());
        assert!(StateSpace::new(Vec::<String>::new()).is_err());
        assert!(StateSpace::new(["a,b"]).is_err());
        let s = StateSpace::new(["h", "t", "e"]).unwrap();
        let e = s.parse_event("t, e").unwrap();
        assert_eq!(s.format_event(e), "{t,e}");
        assert!(s.parse_event("x").is_err());
        assert!(s.parse_event("").is_err());
    }

    #[test]
    fn json_shapes() {
        let b: Belief = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(serde_json::to_string(&b).unwrap(), "[0.25,0.75]");
        assert!(serde_json::from_str::<Belief>("[0.25,0.25]").is_err());
        let s: StateSpace = serde_json::from_str(r#"["a","b"]"#).unwrap();
        assert_eq!(s.len(), 2);
    }

    fn arb_belief(n: usize) -> impl Strategy<Value = Belief> {
        prop::collection::vec(0.0f64..1.0, n).prop_filter_map("nonzero", |w| {
            let w: Vec<f64> = w.into_iter().map(|x| if x < 0.2 { 0.0 } else { x }).collect();
            Belief::from_weights(&w).ok()
        })
    }

    proptest! {
        #[test]
        fn bayes_output_is_feasible(b in arb_belief(5), mask in 1u64..32) {
            let p = NumericPolicy::default();
            let e = Event::from_mask(mask, 5).unwrap();
            if b.mass(e) > p.null_tol {
                let post = bayes_update(&b, e, &p).unwrap();
                prop_assert!((post.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!((0..5).all(|i| e.contains(i) || post.get(i) == 0.0));
            }
        }

        #[test]
        fn bayes_chain_rule(b in arb_belief(5), outer in 1u64..32, inner in 1u64..32) {
            let p = NumericPolicy::default();
            let e = Event::from_mask(outer, 5).unwrap();
            if let Some(f) = Event::from_mask(inner & outer, 5) {
                if b.mass(f) > p.null_tol {
                    let two_step = bayes_update(&bayes_update(&b, e, &p).unwrap(), f, &p).unwrap();
                    let direct = bayes_update(&b, f, &p).unwrap();
                    prop_assert!(two_step.approx_eq(&direct, p.cmp_tol));
                }
            }
        }

        #[test]
        fn update_on_support_is_identity(b in arb_belief(5)) {
            let p = NumericPolicy::default();
            let sp = support(&b, &p).unwrap();
            prop_assert!(bayes_update(&b, sp, &p).unwrap().approx_eq(&b, p.cmp_tol));
        }
    }
}

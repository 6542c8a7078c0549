//! Payoff states crossed with messages, and the distorted-Bayes rule that
//! weighs likelihoods through `f` and base rates through `g`.

use serde::{Deserialize, Serialize};

use crate::belief::{bayes_update, Belief, Event, NumericPolicy, StateSpace};
use crate::distance::{DeltaSpec, DistanceSpec};
use crate::error::{Error, Result};
use crate::report::{AuditReport, Violation};
use crate::solver::{self, minimize_objective, SolverConfig};

/// Distortion of a probability in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistortionFn {
    Identity,
    /// `x^exponent`
    Power { exponent: f64 },
    /// Piecewise-linear interpolation through `(x, value)` points.
    Table { points: Vec<(f64, f64)> },
}

/// Shape of a distortion, which decides how persuasion problems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    Linear,
    StrictlyConcave,
    /// Strictly convex with zero slope at the origin.
    FlatConvex,
    Other,
}

impl DistortionFn {
    pub fn power(exponent: f64) -> Self {
        DistortionFn::Power { exponent }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistortionFn::Identity => Ok(()),
            DistortionFn::Power { exponent } if *exponent > 0.0 && exponent.is_finite() => Ok(()),
            DistortionFn::Table { points } => {
                let ok = points.len() >= 2
                    && points.windows(2).all(|w| w[1].0 > w[0].0)
                    && points.iter().all(|(x, v)| (0.0..=1.0).contains(x) && v.is_finite() && *v >= 0.0)
                    && points.iter().all(|(x, v)| *x == 0.0 || *v > 0.0);
                if ok {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(
                        "table needs sorted distinct points in [0,1] with values positive away from 0".into(),
                    ))
                }
            }
            other => Err(Error::InvalidParameter(format!("bad distortion {other:?}"))),
        }
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        match self {
            DistortionFn::Identity => Ok(x),
            DistortionFn::Power { exponent } => Ok(x.powf(*exponent)),
            DistortionFn::Table { points } => {
                let (lo, hi) = (points[0].0, points[points.len() - 1].0);
                if !(lo..=hi).contains(&x) {
                    return Err(Error::TableMiss(x));
                }
                let k = points.partition_point(|p| p.0 <= x).clamp(1, points.len() - 1);
                let (x0, y0) = points[k - 1];
                let (x1, y1) = points[k];
                Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
            }
        }
    }

    pub fn is_strictly_increasing(&self) -> bool {
        match self {
            DistortionFn::Table { points } => points.windows(2).all(|w| w[1].1 > w[0].1),
            _ => true,
        }
    }

    pub fn curvature(&self) -> Curvature {
        match self {
            DistortionFn::Identity => Curvature::Linear,
            DistortionFn::Power { exponent } if *exponent == 1.0 => Curvature::Linear,
            DistortionFn::Power { exponent } if *exponent < 1.0 => Curvature::StrictlyConcave,
            DistortionFn::Power { .. } => Curvature::FlatConvex,
            DistortionFn::Table { .. } => Curvature::Other,
        }
    }

    /// Solve `f(x) = y` on `[0, 1]`; `None` when `y` exceeds `f(1)`.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        let top = self.apply(1.0).ok()?;
        if y > top {
            return None;
        }
        match self {
            DistortionFn::Identity => Some(y.max(0.0)),
            DistortionFn::Power { exponent } => Some(y.max(0.0).powf(1.0 / exponent)),
            DistortionFn::Table { .. } => {
                // Monotone bisection; tables are only used off the fast paths.
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.apply(mid).ok()? < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(hi)
            }
        }
    }

    /// Solve `f'(x) = t` for flat-convex power distortions.
    pub fn derivative_inverse(&self, t: f64) -> Option<f64> {
        match self {
            DistortionFn::Power { exponent } if *exponent > 1.0 => {
                Some((t.max(0.0) / exponent).powf(1.0 / (exponent - 1.0)))
            }
            _ => None,
        }
    }

    /// The same map as a prior distortion, when one exists.
    pub fn as_delta(&self) -> Option<DeltaSpec> {
        match self {
            DistortionFn::Identity => Some(DeltaSpec::Identity),
            DistortionFn::Power { exponent } => Some(DeltaSpec::Power { alpha: *exponent }),
            DistortionFn::Table { .. } => None,
        }
    }
}

/// Base rates over payoff states, a likelihood matrix and the two distortions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    pub omega_labels: Vec<String>,
    pub message_labels: Vec<String>,
    pub p_omega: Belief,
    /// `likelihoods[ω][m] = P(m | ω)`
    pub likelihoods: Vec<Vec<f64>>,
    pub f: DistortionFn,
    pub g: DistortionFn,
}

const ROW_TOL: f64 = 1e-12;

impl SignalModel {
    pub fn new(
        omega_labels: Vec<String>,
        message_labels: Vec<String>,
        p_omega: Belief,
        likelihoods: Vec<Vec<f64>>,
        f: DistortionFn,
        g: DistortionFn,
    ) -> Result<Self> {
        let m = Self { omega_labels, message_labels, p_omega, likelihoods, f, g };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let (no, nm) = (self.omega_labels.len(), self.message_labels.len());
        StateSpace::new(self.omega_labels.clone())?;
        StateSpace::new(self.message_labels.clone())?;
        if self.p_omega.len() != no {
            return Err(Error::ShapeMismatch { expected: no, got: self.p_omega.len() });
        }
        if self.likelihoods.len() != no {
            return Err(Error::ShapeMismatch { expected: no, got: self.likelihoods.len() });
        }
        for (w, row) in self.likelihoods.iter().enumerate() {
            if row.len() != nm {
                return Err(Error::ShapeMismatch { expected: nm, got: row.len() });
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (row.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidParameter(format!(
                    "likelihood row for {} must be a distribution",
                    self.omega_labels[w]
                )));
            }
        }
        self.f.validate()?;
        self.g.validate()?;
        if !self.f.is_strictly_increasing() {
            return Err(Error::InvalidParameter("signal distortion must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn omega_count(&self) -> usize {
        self.omega_labels.len()
    }

    pub fn message_count(&self) -> usize {
        self.message_labels.len()
    }

    pub fn message_index(&self, label: &str) -> Result<usize> {
        self.message_labels
            .iter()
            .position(|m| m == label)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown message {label}")))
    }

    /// Product space with labels `omega:m`, payoff state outer.
    pub fn product_space(&self) -> StateSpace {
        StateSpace::new(
            self.omega_labels
                .iter()
                .flat_map(|w| self.message_labels.iter().map(move |m| format!("{w}:{m}"))),
        )
        .expect("validated labels")
    }

    /// The event `{(ω, m)}_{ω ∈ Ω}` of receiving `message`.
    pub fn message_event(&self, message: usize) -> Event {
        let nm = self.message_count();
        let idx: Vec<usize> = (0..self.omega_count()).map(|w| w * nm + message).collect();
        Event::new(&idx, self.omega_count() * nm).expect("in range")
    }
}

/// Joint prior `μ_{ωm} = P(m|ω)·P(ω)` on the product space.
pub fn product_prior(m: &SignalModel) -> Belief {
    let w: Vec<f64> = m
        .likelihoods
        .iter()
        .zip(m.p_omega.probs())
        .flat_map(|(row, p)| row.iter().map(move |l| l * p))
        .collect();
    Belief::new(w).expect("product of distributions")
}

fn grether_weights(m: &SignalModel, message: usize) -> Result<Vec<f64>> {
    m.likelihoods
        .iter()
        .zip(m.p_omega.probs())
        .map(|(row, &p)| Ok(m.f.apply(row[message])? * m.g.apply(p)?))
        .collect()
}

/// Posterior over payoff states after `message`, `∝ f(P(m|ω))·g(P(ω))`.
pub fn grether_posterior(m: &SignalModel, message: usize) -> Result<Belief> {
    if message >= m.message_count() {
        return Err(Error::InvalidParameter(format!("message index {message} out of range")));
    }
    let w = grether_weights(m, message)?;
    let total: f64 = w.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ZeroDenominator(format!(
            "distorted weights for message {} sum to {total}",
            m.message_labels[message]
        )));
    }
    Belief::new(w.iter().map(|x| x / total).collect())
}

/// Lift a posterior over payoff states onto the product space.
pub fn lift(m: &SignalModel, message: usize, post: &Belief) -> Belief {
    let nm = m.message_count();
    let mut w = vec![0.0; m.omega_count() * nm];
    for (i, p) in post.probs().iter().enumerate() {
        w[i * nm + message] = *p;
    }
    Belief::new(w).expect("lifted distribution")
}

/// Reconcile the signal-space rule with distance minimization on the product
/// space: the log-weighted distance's exact minimizer, a generic numerical
/// minimization, and (when `f` and `g` coincide or are both the identity) the
/// matching distance from the engine.
pub fn grether_distance_check(m: &SignalModel, message: usize) -> AuditReport {
    const EXACT_TOL: f64 = 1e-8;
    const SOLVER_TOL: f64 = 1e-6;
    let axiom = "grether_distance";
    let label = m.message_labels.get(message).cloned().unwrap_or_default();
    let prior = product_prior(m);
    if prior.probs().iter().any(|&p| p <= 0.0) {
        return AuditReport::new(
            axiom,
            vec![Violation::new("product prior must be strictly positive for the distance to be finite")],
        );
    }
    let target = match grether_posterior(m, message) {
        Ok(b) => lift(m, message, &b),
        Err(e) => return AuditReport::new(axiom, vec![Violation::new(format!("posterior undefined: {e}"))]),
    };
    let n = prior.len();
    let e = m.message_event(message);
    let nm = m.message_count();
    let mut violations = Vec::new();
    let mut notes = Vec::new();

    // Per-cell weights g(P(ω))·f(P(m|ω)) built from the joint prior's marginals.
    let weights: Vec<f64> = (0..n)
        .map(|s| {
            let w = s / nm;
            let row: f64 = prior.probs()[w * nm..(w + 1) * nm].iter().sum();
            let cond = prior.get(s) / row;
            m.g.apply(row).unwrap_or(f64::NAN) * m.f.apply(cond).unwrap_or(f64::NAN)
        })
        .collect();
    let on_event: f64 = e.iter().map(|s| weights[s]).sum();
    let exact: Vec<f64> = (0..n).map(|s| if e.contains(s) { weights[s] / on_event } else { 0.0 }).collect();
    let exact = Belief::new(exact);
    match &exact {
        Ok(b) if b.sup_dist(&target) <= EXACT_TOL => {}
        Ok(b) => violations.push(
            Violation::new("exact minimizer differs from the signal-space posterior")
                .events([label.clone()])
                .values([b.sup_dist(&target)]),
        ),
        Err(err) => violations.push(Violation::new(format!("exact minimizer undefined: {err}"))),
    }

    let objective = |x: &[f64]| -> f64 {
        let mut v = 0.0;
        for s in e.iter() {
            if x[s] <= 0.0 {
                return f64::INFINITY;
            }
            v -= weights[s] * (x[s] / prior.get(s)).ln();
        }
        v
    };
    match minimize_objective(objective, n, e, &SolverConfig::default(), None) {
        Ok(sol) => {
            let gap = sol.x.iter().zip(target.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            notes.push(format!("numerical minimizer within {gap:.2e} of the posterior"));
            if gap > SOLVER_TOL {
                violations.push(
                    Violation::new("numerical minimizer differs from the signal-space posterior")
                        .events([label.clone()])
                        .values([gap]),
                );
            }
        }
        Err(err) => violations.push(Violation::new(format!("numerical minimization failed: {err}"))),
    }

    // Equal distortions collapse to a distorted prior on the product space.
    let engine = match (&m.f, &m.g) {
        (DistortionFn::Identity, DistortionFn::Identity) => {
            Some(bayes_update(&prior, e, &NumericPolicy::default()).map(|b| ("bayes", b)))
        }
        (f, g) if f == g => f.as_delta().map(|delta| {
            solver::posterior(
                &DistanceSpec::distorted(delta),
                &prior,
                e,
                &SolverConfig::default(),
                &NumericPolicy::default(),
            )
            .map(|b| ("distorted prior", b))
        }),
        _ => None,
    };
    match engine {
        Some(Ok((name, b))) => {
            notes.push(format!("compared against the {name} update on the product space"));
            if b.sup_dist(&target) > EXACT_TOL {
                violations.push(
                    Violation::new(format!("{name} update differs from the signal-space posterior"))
                        .events([label.clone()])
                        .values([b.sup_dist(&target)]),
                );
            }
        }
        Some(Err(err)) => violations.push(Violation::new(format!("engine update failed: {err}"))),
        None => {}
    }

    notes.into_iter().fold(AuditReport::new(axiom, violations), |r, n| r.with_note(n))
}

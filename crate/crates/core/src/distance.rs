//! Subjective distance functions and their concave generators.
//!
//! Only pointwise evaluation lives here; minimization is in [`crate::solver`].
//! A [`BoundDistance`] resolves the anchor vector (the distorted, mixed or
//! fallback prior) once so repeated evaluation inside the solver is cheap and
//! table misses surface before any iteration starts.

use serde::{Deserialize, Serialize};

use crate::belief::{check_len, support, Belief, NumericPolicy};
use crate::error::{Error, Result};

/// Value substituted for negative candidate entries inside generator ratios.
pub(crate) const CLIP: f64 = 1e-14;

/// Strictly increasing, strictly concave generator with finite value at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSpec {
    /// `ln(a·x + b)`
    LogShifted { a: f64, b: f64 },
    /// `(x^α − 1)/(1 − α)`
    PowerRenyi { alpha: f64 },
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec::LogShifted { a: 1.0, b: 1.0 }
    }
}

impl SigmaSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SigmaSpec::LogShifted { a, b } if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => {
                Ok(())
            }
            SigmaSpec::PowerRenyi { alpha } if alpha > 0.0 && alpha < 1.0 => Ok(()),
            _ => Err(Error::InvalidParameter(format!("bad sigma {self:?}"))),
        }
    }

    #[inline]
    fn raw(&self, x: f64) -> f64 {
        match *self {
            SigmaSpec::LogShifted { a, b } => (a * x + b).ln(),
            SigmaSpec::PowerRenyi { alpha } => (x.powf(alpha) - 1.0) / (1.0 - alpha),
        }
    }

    /// The level gap `σ(1) + |σ(0)|` separating support classes.
    pub fn gap(&self) -> f64 {
        self.raw(1.0) + self.raw(0.0).abs()
    }
}

/// Evaluate a generator at `x ≥ 0`.
pub fn sigma_eval(s: &SigmaSpec, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::DomainError(x));
    }
    Ok(s.raw(x))
}

/// Distortion applied to prior probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaSpec {
    Identity,
    /// `x^α`
    Power { alpha: f64 },
    /// `1/(1 + e^{a(x0 − x)})`
    Sigmoid { a: f64, x0: f64 },
    /// `x + b·1{x > 1/2}`
    ConfirmationBias { b: f64 },
    /// Exact lookup of `(probability, value)` pairs.
    Table { points: Vec<(f64, f64)> },
}

/// Relative slack for matching a table key; keys are stored probabilities,
/// so this only absorbs last-bit noise.
const TABLE_KEY_TOL: f64 = 1e-12;

impl DeltaSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            DeltaSpec::Identity => true,
            DeltaSpec::Power { alpha } => *alpha > 0.0 && alpha.is_finite(),
            DeltaSpec::Sigmoid { a, x0 } => *a > 0.0 && a.is_finite() && x0.is_finite(),
            DeltaSpec::ConfirmationBias { b } => *b > 0.0 && b.is_finite(),
            DeltaSpec::Table { points } => points
                .iter()
                .all(|(p, v)| (0.0..=1.0).contains(p) && *v >= 0.0 && v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad distortion {self:?}")))
        }
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        Ok(match self {
            DeltaSpec::Identity => x,
            DeltaSpec::Power { alpha } => x.powf(*alpha),
            DeltaSpec::Sigmoid { a, x0 } => 1.0 / (1.0 + (a * (x0 - x)).exp()),
            DeltaSpec::ConfirmationBias { b } => x + if x > 0.5 { *b } else { 0.0 },
            DeltaSpec::Table { points } => points
                .iter()
                .find(|(p, _)| (p - x).abs() <= TABLE_KEY_TOL * p.abs().max(x.abs()).max(1e-300))
                .map(|&(_, v)| v)
                .ok_or(Error::TableMiss(x))?,
        })
    }

    /// True when the distortion is strictly increasing on [0, 1].
    pub fn is_strictly_increasing(&self) -> bool {
        match self {
            DeltaSpec::Table { points } => {
                let mut pts = points.clone();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                pts.windows(2).all(|w| w[1].1 > w[0].1)
            }
            _ => true,
        }
    }
}

/// Tagged description of a subjective distance `d_μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistanceSpec {
    BayesianDivergence {
        #[serde(default)]
        sigma: SigmaSpec,
    },
    Distorted {
        delta: DeltaSpec,
        #[serde(default)]
        sigma: SigmaSpec,
    },
    Mixed {
        rho: Belief,
        #[serde(default)]
        sigma: SigmaSpec,
    },
    SupportDependent {
        mu_star: Belief,
        #[serde(default)]
        sigma: SigmaSpec,
    },
    Euclidean,
}

impl DistanceSpec {
    pub fn bayesian() -> Self {
        DistanceSpec::BayesianDivergence {
            sigma: SigmaSpec::default(),
        }
    }

    pub fn distorted(delta: DeltaSpec) -> Self {
        DistanceSpec::Distorted {
            delta,
            sigma: SigmaSpec::default(),
        }
    }

    pub fn mixed(rho: Belief) -> Self {
        DistanceSpec::Mixed {
            rho,
            sigma: SigmaSpec::default(),
        }
    }

    pub fn support_dependent(mu_star: Belief) -> Self {
        DistanceSpec::SupportDependent {
            mu_star,
            sigma: SigmaSpec::default(),
        }
    }

    pub fn sigma(&self) -> Option<SigmaSpec> {
        match self {
            DistanceSpec::BayesianDivergence { sigma }
            | DistanceSpec::Distorted { sigma, .. }
            | DistanceSpec::Mixed { sigma, .. }
            | DistanceSpec::SupportDependent { sigma, .. } => Some(*sigma),
            DistanceSpec::Euclidean => None,
        }
    }

    /// Short variant name for reports.
    pub fn name(&self) -> &'static str {
        match self {
            DistanceSpec::BayesianDivergence { .. } => "bayesian_divergence",
            DistanceSpec::Distorted { .. } => "distorted",
            DistanceSpec::Mixed { .. } => "mixed",
            DistanceSpec::SupportDependent { .. } => "support_dependent",
            DistanceSpec::Euclidean => "euclidean",
        }
    }

    /// Check parameters and the coverage conditions that make updating
    /// complete for this prior.
    pub fn validate_for(&self, prior: &Belief, policy: &NumericPolicy) -> Result<()> {
        if let Some(s) = self.sigma() {
            s.validate()?;
        }
        let covers = |other: &Belief, what: &str| -> Result<()> {
            check_len(prior.len(), other.len())?;
            let sp = support(prior, policy)?.union(support(other, policy)?);
            if sp.len() != prior.len() {
                return Err(Error::InvalidParameter(format!(
                    "supports of prior and {what} must cover every state"
                )));
            }
            Ok(())
        };
        match self {
            DistanceSpec::Distorted { delta, .. } => delta.validate(),
            DistanceSpec::Mixed { rho, .. } => covers(rho, "rho"),
            DistanceSpec::SupportDependent { mu_star, .. } => covers(mu_star, "mu_star"),
            _ => Ok(()),
        }
    }

    /// Resolve the anchor for `prior`.
    pub fn bind(&self, prior: &Belief, policy: &NumericPolicy) -> Result<BoundDistance> {
        let anchor = match self {
            DistanceSpec::BayesianDivergence { .. } | DistanceSpec::Euclidean => {
                prior.probs().to_vec()
            }
            DistanceSpec::Distorted { delta, .. } => prior
                .probs()
                .iter()
                .map(|&p| delta.apply(p))
                .collect::<Result<Vec<_>>>()?,
            DistanceSpec::Mixed { rho, .. } => {
                check_len(prior.len(), rho.len())?;
                prior.probs().iter().zip(rho.probs()).map(|(a, b)| a + b).collect()
            }
            DistanceSpec::SupportDependent { mu_star, .. } => {
                check_len(prior.len(), mu_star.len())?;
                prior.probs().to_vec()
            }
        };
        Ok(BoundDistance {
            spec: self.clone(),
            anchor,
            null_tol: policy.null_tol,
        })
    }
}

/// `β^σ(x, y) = −Σ x_i σ(y_i/x_i)`, with terms where `x_i = 0` dropped.
pub fn bayesian_function(x: &[f64], y: &[f64], s: &SigmaSpec) -> Result<f64> {
    check_len(x.len(), y.len())?;
    let mut total = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        if xi < 0.0 || yi < 0.0 {
            return Err(Error::DomainError(xi.min(yi)));
        }
        if xi > 0.0 {
            total -= xi * s.raw(yi / xi);
        }
    }
    Ok(total)
}

/// Same as [`bayesian_function`] but tolerant of slightly negative
/// candidates, which are clipped; used on solver iterates.
#[inline]
pub(crate) fn bayesian_function_clipped(x: &[f64], y: &[f64], s: &SigmaSpec) -> f64 {
    x.iter()
        .zip(y)
        .filter(|(xi, _)| **xi > 0.0)
        .map(|(&xi, &yi)| -xi * s.raw(if yi < 0.0 { CLIP } else { yi } / xi))
        .sum()
}

/// Evaluate `d_μ(π)` for two beliefs.
pub fn distance_eval(d: &DistanceSpec, prior: &Belief, candidate: &Belief) -> Result<f64> {
    check_len(prior.len(), candidate.len())?;
    let bound = d.bind(prior, &NumericPolicy::default())?;
    Ok(bound.eval(candidate.probs()))
}

/// A distance with its anchor vector precomputed for one prior.
#[derive(Debug, Clone)]
pub struct BoundDistance {
    spec: DistanceSpec,
    anchor: Vec<f64>,
    null_tol: f64,
}

impl BoundDistance {
    pub fn spec(&self) -> &DistanceSpec {
        &self.spec
    }

    /// Vector that plays the role of the prior inside `β^σ`.
    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Distance value at a raw candidate vector.
    pub fn eval(&self, y: &[f64]) -> f64 {
        match &self.spec {
            DistanceSpec::Euclidean => self
                .anchor
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            DistanceSpec::SupportDependent { mu_star, sigma } => {
                let reached: f64 = self
                    .anchor
                    .iter()
                    .zip(y)
                    .filter(|(_, yi)| **yi > self.null_tol)
                    .map(|(a, _)| a)
                    .sum();
                if reached > 0.0 {
                    bayesian_function_clipped(&self.anchor, y, sigma)
                } else {
                    bayesian_function_clipped(mu_star.probs(), y, sigma) + sigma.gap()
                }
            }
            DistanceSpec::BayesianDivergence { sigma }
            | DistanceSpec::Distorted { sigma, .. }
            | DistanceSpec::Mixed { sigma, .. } => {
                bayesian_function_clipped(&self.anchor, y, sigma)
            }
        }
    }

    /// Objective handed to the generic solver. It has the same minimizers as
    /// [`Self::eval`]; the Euclidean norm is squared so it is smooth at its
    /// minimum.
    pub fn objective(&self, y: &[f64]) -> f64 {
        match &self.spec {
            DistanceSpec::Euclidean => self
                .anchor
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
            _ => self.eval(y),
        }
    }
}

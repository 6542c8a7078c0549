//! Minimization of a distance over the face `Δ(E)` of the simplex.
//!
//! Closed forms cover every catalog distance on its regular cases. The generic
//! path is a projected-gradient method with finite-difference gradients; it
//! backs the irregular cases and doubles as an oracle for the closed forms.

use std::collections::VecDeque;

use crate::belief::{bayes_update_weights, check_len, weight_mass, Belief, Event, NumericPolicy};
use crate::distance::{BoundDistance, DistanceSpec};
use crate::error::{Error, Result};

/// Finite-difference step.
const FD_STEP: f64 = 1e-7;
/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
/// Window of the nonmonotone line search.
const MEMORY: usize = 8;
/// Iterations without improving the best value before declaring stagnation.
const STALL_LIMIT: usize = 60;
/// Non-improving iterations before restarting from the best point with a
/// monotone line search.
const MONOTONE_AFTER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Plain projected step of fixed length.
    Fixed(f64),
    /// Spectral step length with nonmonotone backtracking.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub solve_tol: f64,
    pub step_rule: StepRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            solve_tol: 1e-10,
            step_rule: StepRule::Backtracking,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let step_ok = match self.step_rule {
            StepRule::Fixed(eta) => eta > 0.0 && eta.is_finite(),
            StepRule::Backtracking => true,
        };
        if self.max_iters == 0 || !(self.solve_tol > 0.0) || !step_ok {
            return Err(Error::InvalidParameter(format!("bad solver config {self:?}")));
        }
        Ok(())
    }
}

/// Result of a generic minimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
    pub iters: usize,
    pub movement: f64,
}

/// Euclidean projection of `y` onto the simplex over the coordinates in `e`;
/// coordinates outside `e` are set to zero.
pub fn project_onto_face(y: &[f64], e: Event) -> Vec<f64> {
    let idx: Vec<usize> = e.iter().filter(|&i| i < y.len()).collect();
    let mut sorted: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    let mut out = vec![0.0; y.len()];
    for &i in &idx {
        out[i] = (y[i] - theta).max(0.0);
    }
    out
}

fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, idx: &[usize], buf: &mut Vec<f64>) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    buf.clear();
    buf.extend_from_slice(x);
    for &i in idx {
        let xi = x[i];
        buf[i] = xi + FD_STEP;
        let up = f(buf);
        if xi >= FD_STEP {
            buf[i] = xi - FD_STEP;
            let down = f(buf);
            g[i] = (up - down) / (2.0 * FD_STEP);
        } else {
            g[i] = (up - fx) / FD_STEP;
        }
        buf[i] = xi;
    }
    // Projection onto the face ignores a common shift of its coordinates.
    // Removing one keeps long steps from cancelling digits; the median is
    // robust to the huge one-sided slopes at boundary coordinates.
    let mut on_face: Vec<f64> = idx.iter().map(|&i| g[i]).collect();
    on_face.sort_by(f64::total_cmp);
    let shift = on_face[on_face.len() / 2];
    for &i in idx {
        g[i] -= shift;
    }
    g
}

fn sup_norm(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimize an arbitrary objective over `Δ(E)` in dimension `n`, starting at
/// `start` (projected) or at the barycenter of `E`.
pub fn minimize_objective<F: Fn(&[f64]) -> f64>(
    f: F,
    n: usize,
    e: Event,
    cfg: &SolverConfig,
    start: Option<&[f64]>,
) -> Result<Solution> {
    cfg.validate()?;
    if e.iter().any(|i| i >= n) {
        return Err(Error::InvalidEvent(format!("{e} exceeds {n} states")));
    }
    let idx: Vec<usize> = e.iter().collect();
    let mut x = match start {
        Some(s) => {
            check_len(n, s.len())?;
            project_onto_face(s, e)
        }
        None => Belief::uniform_on(n, e).probs().to_vec(),
    };
    let mut buf = Vec::with_capacity(n);
    let mut fx = f(&x);
    if idx.len() == 1 {
        return Ok(Solution { x, value: fx, iters: 0, movement: 0.0 });
    }
    let mut g = gradient(&f, &x, fx, &idx, &mut buf);
    let mut alpha = match cfg.step_rule {
        StepRule::Fixed(eta) => eta,
        StepRule::Backtracking => 1.0,
    };
    let mut history: VecDeque<f64> = VecDeque::with_capacity(MEMORY);
    history.push_back(fx);
    let (mut best_x, mut best_f) = (x.clone(), fx);
    let mut since_best = 0;
    let mut movement = f64::INFINITY;
    let mut monotone = false;

    for iter in 1..=cfg.max_iters {
        // Near faces where the slope blows up, nonmonotone steps can cycle
        // around the minimizer; fall back to plain descent from the best point.
        if !monotone && since_best >= MONOTONE_AFTER && matches!(cfg.step_rule, StepRule::Backtracking) {
            monotone = true;
            x.clone_from(&best_x);
            fx = best_f;
            g = gradient(&f, &x, fx, &idx, &mut buf);
            history.clear();
            history.push_back(fx);
            since_best = 0;
        }
        let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
        let d: Vec<f64> = project_onto_face(&trial, e)
            .iter()
            .zip(&x)
            .map(|(p, xi)| p - xi)
            .collect();

        let (next, fnext) = match cfg.step_rule {
            StepRule::Fixed(_) => {
                let next: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
                let fn_ = f(&next);
                (next, fn_)
            }
            StepRule::Backtracking => {
                let gd: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                let fmax = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut lambda = 1.0;
                let accepted = loop {
                    let cand: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + lambda * b).collect();
                    let fc = f(&cand);
                    if fc <= fmax + ARMIJO * lambda * gd {
                        break Some((cand, fc));
                    }
                    lambda *= 0.5;
                    if lambda < 1e-20 {
                        break None;
                    }
                };
                match accepted {
                    Some(a) => a,
                    // No descent left above rounding noise.
                    None => {
                        return Ok(Solution { x: best_x, value: best_f, iters: iter, movement: 0.0 })
                    }
                }
            }
        };

        movement = sup_norm(next.iter().zip(&x).map(|(a, b)| a - b));
        let gnext = gradient(&f, &next, fnext, &idx, &mut buf);
        if let StepRule::Backtracking = cfg.step_rule {
            let mut ss = 0.0;
            let mut sy = 0.0;
            for &i in &idx {
                let s = next[i] - x[i];
                ss += s * s;
                sy += s * (gnext[i] - g[i]);
            }
            alpha = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e10) } else { 1e4 };
        }
        x = next;
        fx = fnext;
        g = gnext;
        let window = if monotone { 1 } else { MEMORY };
        while history.len() >= window {
            history.pop_front();
        }
        history.push_back(fx);

        if fx < best_f {
            best_f = fx;
            best_x.clone_from(&x);
            since_best = 0;
        } else {
            since_best += 1;
        }
        if movement < cfg.solve_tol || since_best >= STALL_LIMIT {
            return Ok(Solution { x: best_x, value: best_f, iters: iter, movement });
        }
    }
    if movement >= 1e3 * cfg.solve_tol {
        return Err(Error::NoConvergence { iters: cfg.max_iters, movement });
    }
    Ok(Solution { x: best_x, value: best_f, iters: cfg.max_iters, movement })
}

fn to_belief(x: Vec<f64>) -> Result<Belief> {
    Belief::from_weights(&x)
}

/// Exact minimizer when the distance admits one for this event.
pub fn closed_form_posterior(
    d: &DistanceSpec,
    prior: &Belief,
    e: Event,
    policy: &NumericPolicy,
) -> Result<Option<Belief>> {
    let bound = d.bind(prior, policy)?;
    closed_form_bound(&bound, prior, e, policy)
}

fn closed_form_bound(
    bound: &BoundDistance,
    prior: &Belief,
    e: Event,
    policy: &NumericPolicy,
) -> Result<Option<Belief>> {
    let n = prior.len();
    if e.iter().any(|i| i >= n) {
        return Err(Error::InvalidEvent(format!("{e} exceeds {n} states")));
    }
    let tol = policy.null_tol;
    let bu = |w: &[f64]| -> Result<Option<Belief>> {
        if weight_mass(w, e) > tol {
            bayes_update_weights(w, e, tol).map(Some)
        } else {
            Ok(None)
        }
    };
    match bound.spec() {
        DistanceSpec::BayesianDivergence { .. }
        | DistanceSpec::Distorted { .. }
        | DistanceSpec::Mixed { .. } => bu(bound.anchor()),
        DistanceSpec::SupportDependent { mu_star, .. } => match bu(prior.probs())? {
            Some(b) => Ok(Some(b)),
            None => bu(mu_star.probs()),
        },
        DistanceSpec::Euclidean => {
            let shift = (1.0 - prior.mass(e)) / e.len() as f64;
            let probs = (0..n)
                .map(|i| if e.contains(i) { prior.get(i) + shift } else { 0.0 })
                .collect();
            Belief::new(probs).map(Some)
        }
    }
}

/// Generic projected-gradient minimizer of `d_μ` over `Δ(E)`.
pub fn minimize_over_event(
    d: &DistanceSpec,
    prior: &Belief,
    e: Event,
    cfg: &SolverConfig,
) -> Result<Belief> {
    minimize_from(d, prior, e, cfg, None)
}

/// Like [`minimize_over_event`] with an explicit starting point.
pub fn minimize_from(
    d: &DistanceSpec,
    prior: &Belief,
    e: Event,
    cfg: &SolverConfig,
    start: Option<&[f64]>,
) -> Result<Belief> {
    let bound = d.bind(prior, &NumericPolicy::default())?;
    let sol = minimize_objective(|y| bound.objective(y), prior.len(), e, cfg, start)?;
    to_belief(sol.x)
}

/// Single entry point: closed form when available, generic solver otherwise.
pub fn posterior(
    d: &DistanceSpec,
    prior: &Belief,
    e: Event,
    cfg: &SolverConfig,
    policy: &NumericPolicy,
) -> Result<Belief> {
    let bound = d.bind(prior, policy)?;
    if let Some(b) = closed_form_bound(&bound, prior, e, policy)? {
        return Ok(b);
    }
    if let DistanceSpec::Distorted { .. } = d {
        return Err(Error::UndefinedPosterior(format!(
            "distorted prior puts no mass on {e}"
        )));
    }
    let sol = minimize_objective(|y| bound.objective(y), prior.len(), e, cfg, None)?;
    to_belief(sol.x)
}

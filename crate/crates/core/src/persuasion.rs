//! Sender-optimal signals against a receiver who updates with the distorted
//! rule `∝ g(ρ_i)·f(π_m(ω_i))`.
//!
//! With two actions the receiver takes `a` at message `m` iff
//! `Σ g(ρ_i) f(π_m(ω_i)) u_i ≥ 0`. States with `u_i ≥ 0` generate a budget
//! that the sender spends on pooling the remaining states into `m`; the
//! curvature of `f` decides the shape of the optimal spend.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::signal::{Curvature, DistortionFn};

/// Slack allowed when testing the receiver's weak inequality.
pub const CONSTRAINT_TOL: f64 = 1e-9;
const LAMBDA_RANGE: (f64, f64) = (1e-12, 1e12);
const BISECTION_STEPS: usize = 200;
/// Largest number of opposed states the vertex enumeration accepts.
const MAX_ENUMERATED: usize = 20;
/// Largest grid the oracle will walk.
const MAX_GRID_POINTS: f64 = 5e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersuasionEnv {
    pub rho: Belief,
    /// `u(a, ω_i) − u(b, ω_i)`
    pub u_diff: Vec<f64>,
    pub f: DistortionFn,
    pub g: DistortionFn,
    pub num_messages: usize,
}

impl PersuasionEnv {
    pub fn new(rho: Belief, u_diff: Vec<f64>, f: DistortionFn, g: DistortionFn, num_messages: usize) -> Result<Self> {
        let env = Self { rho, u_diff, f, g, num_messages };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u_diff.len() != self.rho.len() {
            return Err(Error::ShapeMismatch { expected: self.rho.len(), got: self.u_diff.len() });
        }
        if self.u_diff.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidParameter("payoff differences must be finite".into()));
        }
        if self.num_messages < 2 {
            return Err(Error::InvalidParameter("at least two messages are needed".into()));
        }
        self.f.validate()?;
        self.g.validate()?;
        if !self.f.is_strictly_increasing() {
            return Err(Error::InvalidParameter("signal distortion must be strictly increasing".into()));
        }
        for &r in self.rho.probs() {
            if r > 0.0 && self.g.apply(r)? <= 0.0 {
                return Err(Error::InvalidParameter("prior distortion must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    /// `Σ g(ρ_i) u_i`; the problem is interesting only when this is negative.
    pub fn guard(&self) -> Result<f64> {
        self.rho
            .probs()
            .iter()
            .zip(&self.u_diff)
            .map(|(&r, &u)| Ok(self.g.apply(r)? * u))
            .sum()
    }

    /// States where sender and receiver agree (`u_i ≥ 0`).
    pub fn aligned(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.u_diff[i] >= 0.0).collect()
    }

    pub fn opposed(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.u_diff[i] < 0.0).collect()
    }

    /// `δ_i = |g(ρ_i) u_i|`
    pub fn weights(&self) -> Result<Vec<f64>> {
        self.rho
            .probs()
            .iter()
            .zip(&self.u_diff)
            .map(|(&r, &u)| Ok((self.g.apply(r)? * u).abs()))
            .collect()
    }
}

/// `pi[m][i] = π_m(ω_i)`; every state's column sums to one over messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalStructure {
    pub pi: Vec<Vec<f64>>,
}

impl SignalStructure {
    pub fn new(pi: Vec<Vec<f64>>) -> Result<Self> {
        let s = Self { pi };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.pi.first().map_or(0, Vec::len);
        if self.pi.is_empty() || n == 0 || self.pi.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("signal needs equal-length message rows".into()));
        }
        for i in 0..n {
            let col: f64 = self.pi.iter().map(|r| r[i]).sum();
            if self.pi.iter().any(|r| !(-1e-12..=1.0 + 1e-12).contains(&r[i])) || (col - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("column {i} is not a distribution over messages")));
            }
        }
        Ok(())
    }

    /// `m1 = x`, `m2 = 1 − x`.
    pub fn binary(x: &[f64]) -> Self {
        Self { pi: vec![x.to_vec(), x.iter().map(|v| 1.0 - v).collect()] }
    }

    pub fn messages(&self) -> usize {
        self.pi.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LinearGreedy,
    ConcaveVertex,
    ConvexInterior,
    GridFallback,
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "linear_greedy" => Ok(Regime::LinearGreedy),
            "concave" | "concave_vertex" => Ok(Regime::ConcaveVertex),
            "convex" | "convex_interior" => Ok(Regime::ConvexInterior),
            "grid" | "grid_fallback" => Ok(Regime::GridFallback),
            other => Err(Error::InvalidParameter(format!("unknown regime {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersuasionSolution {
    pub signal: SignalStructure,
    /// Realized value: prior mass of messages that actually induce `a`.
    pub sender_value: f64,
    pub receiver_actions: Vec<Action>,
    pub regime: Regime,
    /// Value of the pooled relaxation behind a rich-message solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxed_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `Σ g(ρ_i) f(π_m(ω_i)) u_i`
pub fn persuasion_slack(env: &PersuasionEnv, row: &[f64]) -> Result<f64> {
    env.rho
        .probs()
        .iter()
        .zip(&env.u_diff)
        .zip(row)
        .map(|((&r, &u), &x)| Ok(env.g.apply(r)? * env.f.apply(x.clamp(0.0, 1.0))? * u))
        .sum()
}

/// The receiver's best response to `message`; ties go to `a`.
pub fn receiver_action(env: &PersuasionEnv, signal: &SignalStructure, message: usize) -> Result<Action> {
    let row = signal
        .pi
        .get(message)
        .ok_or_else(|| Error::InvalidParameter(format!("message {message} out of range")))?;
    if row.len() != env.n() {
        return Err(Error::ShapeMismatch { expected: env.n(), got: row.len() });
    }
    Ok(if persuasion_slack(env, row)? >= -CONSTRAINT_TOL { Action::A } else { Action::B })
}

/// Prior mass of messages that induce `a`.
pub fn sender_value(env: &PersuasionEnv, signal: &SignalStructure) -> Result<f64> {
    let mut v = 0.0;
    for (m, row) in signal.pi.iter().enumerate() {
        if receiver_action(env, signal, m)? == Action::A {
            v += env.rho.probs().iter().zip(row).map(|(r, x)| r * x).sum::<f64>();
        }
    }
    Ok(v)
}

fn finish(env: &PersuasionEnv, signal: SignalStructure, regime: Regime, notes: Vec<String>) -> Result<PersuasionSolution> {
    let receiver_actions = (0..signal.messages())
        .map(|m| receiver_action(env, &signal, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(PersuasionSolution {
        sender_value: sender_value(env, &signal)?,
        signal,
        receiver_actions,
        regime,
        relaxed_value: None,
        notes,
    })
}

/// How opposed-state mass is spread over the `k` messages that induce `a`.
#[derive(Debug, Clone, Copy)]
enum Pooling {
    /// All of a state's pooled mass sits in one message.
    Concentrated(usize),
    /// A state's pooled mass is split evenly across all `k` messages.
    Spread(usize),
}

/// Budget-constrained allocation of opposed-state mass `y_i ∈ [0, 1]`.
struct Allocation<'a> {
    f: &'a DistortionFn,
    rho: Vec<f64>,
    delta: Vec<f64>,
    budget: f64,
    pooling: Pooling,
}

impl Allocation<'_> {
    fn cost(&self, i: usize, y: f64) -> f64 {
        let f = |x: f64| self.f.apply(x).unwrap_or(f64::INFINITY);
        self.delta[i]
            * match self.pooling {
                Pooling::Concentrated(k) => f(y) + (k - 1) as f64 * f(0.0),
                Pooling::Spread(k) => k as f64 * f(y / k as f64),
            }
    }

    fn floor(&self) -> f64 {
        (0..self.rho.len()).map(|i| self.cost(i, 0.0)).sum()
    }

    /// Largest `y ≤ 1` with `cost(i, y) ≤ spend`.
    fn affordable(&self, i: usize, spend: f64) -> f64 {
        if self.cost(i, 1.0) <= spend {
            return 1.0;
        }
        let Pooling::Concentrated(k) = self.pooling else {
            unreachable!("vertex and greedy paths concentrate")
        };
        let f0 = self.f.apply(0.0).unwrap_or(0.0);
        self.f
            .inverse(spend / self.delta[i] - (k - 1) as f64 * f0)
            .unwrap_or(1.0)
            .clamp(0.0, 1.0)
    }

    fn value(&self, y: &[f64]) -> f64 {
        self.rho.iter().zip(y).map(|(r, y)| r * y).sum()
    }

    fn greedy(&self, notes: &mut Vec<String>) -> Vec<f64> {
        let m = self.rho.len();
        let ratio = |i: usize| self.rho[i] / self.delta[i];
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| ratio(j).total_cmp(&ratio(i)).then(i.cmp(&j)));
        if order.windows(2).any(|w| (ratio(w[0]) - ratio(w[1])).abs() <= 1e-12 * ratio(w[0]).abs()) {
            notes.push("equal value-to-cost ratios; ties broken by state index".into());
        }
        let mut left = self.budget - self.floor();
        let mut y = vec![0.0; m];
        for i in order {
            if left <= 0.0 {
                break;
            }
            let spend = left + self.cost(i, 0.0);
            y[i] = self.affordable(i, spend);
            left -= self.cost(i, y[i]) - self.cost(i, 0.0);
        }
        y
    }

    fn vertex(&self) -> Result<Vec<f64>> {
        let m = self.rho.len();
        if m > MAX_ENUMERATED {
            return Err(Error::InvalidParameter(format!(
                "{m} opposed states exceed the enumeration limit of {MAX_ENUMERATED}"
            )));
        }
        let floor = self.floor();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 0u32..(1 << m) {
            let full: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let used = floor + full.iter().map(|&i| self.cost(i, 1.0) - self.cost(i, 0.0)).sum::<f64>();
            if used > self.budget {
                continue;
            }
            let mut base = vec![0.0; m];
            for &i in &full {
                base[i] = 1.0;
            }
            let mut consider = |y: Vec<f64>| {
                let v = self.value(&y);
                if best.as_ref().map_or(true, |(bv, _)| v > *bv + 1e-15) {
                    best = Some((v, y));
                }
            };
            consider(base.clone());
            for j in (0..m).filter(|j| mask >> j & 1 == 0) {
                let mut y = base.clone();
                y[j] = self.affordable(j, self.budget - used + self.cost(j, 0.0));
                consider(y);
            }
        }
        best.map(|(_, y)| y)
            .ok_or_else(|| Error::Degenerate("no allocation satisfies the receiver's constraint".into()))
    }

    fn interior(&self) -> Result<Vec<f64>> {
        let k = match self.pooling {
            Pooling::Spread(k) | Pooling::Concentrated(k) => k as f64,
        };
        let m = self.rho.len();
        let at = |lambda: f64| -> Vec<f64> {
            (0..m)
                .map(|i| {
                    let t = self.rho[i] / (lambda * self.delta[i]);
                    match self.f.derivative_inverse(t) {
                        Some(x) => (k * x).min(1.0),
                        None => 0.0,
                    }
                })
                .collect()
        };
        let spend = |y: &[f64]| -> f64 { y.iter().enumerate().map(|(i, &v)| self.cost(i, v)).sum() };
        let all = vec![1.0; m];
        if spend(&all) <= self.budget {
            return Ok(all);
        }
        let (mut lo, mut hi) = (LAMBDA_RANGE.0.ln(), LAMBDA_RANGE.1.ln());
        if spend(&at(hi.exp())) > self.budget {
            return Err(Error::Degenerate("budget too small for any interior allocation".into()));
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if spend(&at(mid.exp())) > self.budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(at(hi.exp()))
    }
}

fn setup(env: &PersuasionEnv) -> Result<(Vec<usize>, Vec<usize>, Vec<f64>)> {
    env.validate()?;
    let aligned = env.aligned();
    if aligned.is_empty() {
        return Err(Error::Degenerate("no state favors the sender's action".into()));
    }
    if env.guard()? >= 0.0 {
        return Err(Error::Precondition(
            "full pooling already induces the sender's action; the value is 1".into(),
        ));
    }
    Ok((aligned, env.opposed(), env.weights()?))
}

fn allowed(curv: Curvature, regime: Regime) -> bool {
    match regime {
        Regime::LinearGreedy => curv == Curvature::Linear,
        Regime::ConcaveVertex => matches!(curv, Curvature::Linear | Curvature::StrictlyConcave),
        Regime::ConvexInterior => curv == Curvature::FlatConvex,
        Regime::GridFallback => true,
    }
}

/// Two messages; the regime follows from the curvature of `f`.
pub fn optimize_binary(env: &PersuasionEnv) -> Result<PersuasionSolution> {
    optimize_binary_with(env, None)
}

/// As [`optimize_binary`], optionally forcing a regime.
pub fn optimize_binary_with(env: &PersuasionEnv, regime: Option<Regime>) -> Result<PersuasionSolution> {
    if env.num_messages != 2 {
        return Err(Error::InvalidParameter("binary solve needs exactly two messages".into()));
    }
    let (aligned, opposed, delta) = setup(env)?;
    let curv = env.f.curvature();
    let regime = regime.unwrap_or(match curv {
        Curvature::Linear => Regime::LinearGreedy,
        Curvature::StrictlyConcave => Regime::ConcaveVertex,
        Curvature::FlatConvex => Regime::ConvexInterior,
        Curvature::Other => Regime::GridFallback,
    });
    if !allowed(curv, regime) {
        return Err(Error::InvalidParameter(format!("{regime:?} does not apply to {curv:?} f")));
    }
    if regime == Regime::GridFallback {
        let steps = ((MAX_GRID_POINTS / 10.0).powf(1.0 / env.n() as f64).floor() as usize).clamp(2, 100);
        return grid_oracle(env, 1.0 / steps as f64);
    }
    let budget = aligned.iter().map(|&i| delta[i]).sum::<f64>() * env.f.apply(1.0)?;
    if budget <= 0.0 {
        return Err(Error::Degenerate("aligned states generate no budget".into()));
    }
    let alloc = Allocation {
        f: &env.f,
        rho: opposed.iter().map(|&i| env.rho.get(i)).collect(),
        delta: opposed.iter().map(|&i| delta[i]).collect(),
        budget,
        pooling: Pooling::Concentrated(1),
    };
    if alloc.floor() > budget {
        return Err(Error::Degenerate("opposed states exhaust the budget at zero".into()));
    }
    let mut notes = Vec::new();
    let y = match regime {
        Regime::LinearGreedy => alloc.greedy(&mut notes),
        Regime::ConcaveVertex => alloc.vertex()?,
        Regime::ConvexInterior => alloc.interior()?,
        Regime::GridFallback => unreachable!(),
    };
    let mut x = vec![1.0; env.n()];
    for (k, &i) in opposed.iter().enumerate() {
        x[i] = y[k];
    }
    finish(env, SignalStructure::binary(&x), regime, notes)
}

/// `k` messages may induce `a`. Solves the relaxation that pools the `k`
/// receiver constraints into one budget, lays the result out in the shapes
/// that relaxation predicts, and reports both the relaxed value and the value
/// the receiver's message-by-message best responses actually deliver.
pub fn optimize_rich(env: &PersuasionEnv, k: usize) -> Result<PersuasionSolution> {
    if env.num_messages < 3 {
        return Err(Error::Precondition("rich solve needs at least three messages".into()));
    }
    if !(2..env.num_messages).contains(&k) {
        return Err(Error::Precondition(format!(
            "k = {k} must lie in [2, {}]",
            env.num_messages - 1
        )));
    }
    let (aligned, opposed, delta) = setup(env)?;
    let curv = env.f.curvature();
    let f1 = env.f.apply(1.0)?;
    let f0 = env.f.apply(0.0)?;
    let kf = k as f64;
    let aligned_delta: f64 = aligned.iter().map(|&i| delta[i]).sum();
    let (regime, pooling, budget) = match curv {
        Curvature::Linear | Curvature::StrictlyConcave => (
            if curv == Curvature::Linear { Regime::LinearGreedy } else { Regime::ConcaveVertex },
            Pooling::Concentrated(k),
            kf * env.f.apply(1.0 / kf)? * aligned_delta,
        ),
        Curvature::FlatConvex => (
            Regime::ConvexInterior,
            Pooling::Spread(k),
            (f1 + (kf - 1.0) * f0) * aligned_delta,
        ),
        Curvature::Other => {
            return Err(Error::InvalidParameter("rich solve needs concave, linear or flat-convex f".into()))
        }
    };
    if budget <= 0.0 {
        return Err(Error::Degenerate("aligned states generate no budget".into()));
    }
    let alloc = Allocation {
        f: &env.f,
        rho: opposed.iter().map(|&i| env.rho.get(i)).collect(),
        delta: opposed.iter().map(|&i| delta[i]).collect(),
        budget,
        pooling,
    };
    if alloc.floor() > budget {
        return Err(Error::Degenerate("opposed states exhaust the budget at zero".into()));
    }
    let mut notes = Vec::new();
    let y = match regime {
        Regime::LinearGreedy => alloc.greedy(&mut notes),
        Regime::ConcaveVertex => alloc.vertex()?,
        _ => alloc.interior()?,
    };

    let n = env.n();
    let mut pi = vec![vec![0.0; n]; env.num_messages];
    for &i in &aligned {
        match pooling {
            Pooling::Concentrated(_) => (0..k).for_each(|s| pi[s][i] = 1.0 / kf),
            Pooling::Spread(_) => pi[0][i] = 1.0,
        }
    }
    for (j, &i) in opposed.iter().enumerate() {
        match pooling {
            Pooling::Concentrated(_) => pi[0][i] = y[j],
            Pooling::Spread(_) => (0..k).for_each(|s| pi[s][i] = y[j] / kf),
        }
    }
    for i in 0..n {
        let used: f64 = (0..k).map(|s| pi[s][i]).sum();
        pi[k][i] = (1.0 - used).max(0.0);
    }
    let relaxed = aligned.iter().map(|&i| env.rho.get(i)).sum::<f64>() + alloc.value(&y);
    let mut sol = finish(env, SignalStructure::new(pi)?, regime, notes)?;
    if sol.sender_value + CONSTRAINT_TOL < relaxed {
        sol.notes.push(format!(
            "pooled relaxation promises {relaxed:.6}; per-message best responses deliver {:.6}",
            sol.sender_value
        ));
    }
    sol.relaxed_value = Some(relaxed);
    Ok(sol)
}

/// Exhaustive search over binary signals `m1 = x`, `m2 = 1 − x` with `x` on
/// a grid of the given resolution, maximizing the mass pooled into an
/// `a`-inducing `m1`. A verification oracle, not a solver. When a grid point
/// lets both messages induce `a` and beats that optimum, a note says so.
pub fn grid_oracle(env: &PersuasionEnv, resolution: f64) -> Result<PersuasionSolution> {
    env.validate()?;
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::InvalidParameter(format!("resolution {resolution} not in (0, 0.5]")));
    }
    let steps = (1.0 / resolution).round() as usize;
    let n = env.n();
    let points = ((steps + 1) as f64).powi(n as i32);
    if points > MAX_GRID_POINTS {
        return Err(Error::InvalidParameter(format!("grid of {points:e} points is too large")));
    }
    let grid: Vec<f64> = (0..=steps).map(|j| j as f64 / steps as f64).collect();
    // Per-state, per-grid-point contributions to the slack and to the value.
    let mut slack = vec![vec![0.0; steps + 1]; n];
    let mut mass = vec![vec![0.0; steps + 1]; n];
    for i in 0..n {
        let w = env.g.apply(env.rho.get(i))? * env.u_diff[i];
        for (j, &x) in grid.iter().enumerate() {
            slack[i][j] = w * env.f.apply(x)?;
            mass[i][j] = env.rho.get(i) * x;
        }
    }
    // (value with m1 inducing a, value counting every a-inducing message)
    let eval = |idx: &[usize]| -> (f64, f64) {
        let (mut s1, mut s2, mut v1, mut v2) = (0.0, 0.0, 0.0, 0.0);
        for (i, &j) in idx.iter().enumerate() {
            s1 += slack[i][j];
            s2 += slack[i][steps - j];
            v1 += mass[i][j];
            v2 += mass[i][steps - j];
        }
        let first = if s1 >= -CONSTRAINT_TOL { v1 } else { 0.0 };
        let second = if s2 >= -CONSTRAINT_TOL { v2 } else { 0.0 };
        (first, first + second)
    };
    type Best = (f64, Vec<usize>, f64);
    let better = |a: &Best, b: &Best| a.0 > b.0 + 1e-15 || ((a.0 - b.0).abs() <= 1e-15 && a.1 < b.1);
    let merge = |a: Best, b: Best| {
        let top = a.2.max(b.2);
        let mut w = if better(&b, &a) { b } else { a };
        w.2 = top;
        w
    };
    let best = (0..=steps)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let (v, full) = eval(&idx);
            let mut best: Best = (v, idx.clone(), full);
            'walk: loop {
                // Odometer over the remaining coordinates.
                let mut pos = n - 1;
                loop {
                    if pos == 0 {
                        break 'walk;
                    }
                    if idx[pos] < steps {
                        idx[pos] += 1;
                        break;
                    }
                    idx[pos] = 0;
                    pos -= 1;
                }
                let (v, full) = eval(&idx);
                best.2 = best.2.max(full);
                if v > best.0 + 1e-15 {
                    best.0 = v;
                    best.1.clone_from(&idx);
                }
            }
            best
        })
        .reduce_with(merge)
        .expect("grid is nonempty");
    let x: Vec<f64> = best.1.iter().map(|&j| grid[j]).collect();
    let mut sol = finish(env, SignalStructure::binary(&x), Regime::GridFallback, Vec::new())?;
    sol.notes.push(format!("grid resolution {}", 1.0 / steps as f64));
    if best.2 > best.0 + CONSTRAINT_TOL {
        sol.notes.push(format!(
            "letting both messages induce a reaches {:.6} against {:.6} with a single a-message",
            best.2, best.0
        ));
    }
    Ok(sol)
}

/// Prior mass pooled into the first message when it induces `a`.
pub fn first_message_value(env: &PersuasionEnv, sol: &PersuasionSolution) -> f64 {
    match sol.receiver_actions.first() {
        Some(Action::A) => env.rho.probs().iter().zip(&sol.signal.pi[0]).map(|(r, x)| r * x).sum(),
        _ => 0.0,
    }
}

//! Seeded generators shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use inertia::cps::Ladder;
use inertia::persuasion::PersuasionEnv;
use inertia::signal::DistortionFn;
use inertia::{Belief, DeltaSpec, DistanceSpec, SigmaSpec, StateSpace, UpdateFamily};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

pub type TestRng = ChaCha8Rng;

/// Seed from `INERTIA_SEED` when set, otherwise a fixed default per stream.
pub fn rng(stream: u64) -> TestRng {
    let base = std::env::var("INERTIA_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0x1e27_1a00u64);
    ChaCha8Rng::seed_from_u64(base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Flat Dirichlet draw with every entry at least `floor`.
pub fn interior(rng: &mut TestRng, n: usize, floor: f64) -> Belief {
    let gamma = Gamma::new(1.0, 1.0).unwrap();
    let raw: Vec<f64> = (0..n).map(|_| gamma.sample(rng) + 1e-9).collect();
    let total: f64 = raw.iter().sum();
    let scale = 1.0 - floor * n as f64;
    Belief::new(raw.iter().map(|x| floor + scale * x / total).collect()).unwrap()
}

/// Interior belief whose entries are pairwise distinct by at least `gap`.
pub fn distinct(rng: &mut TestRng, n: usize, floor: f64, gap: f64) -> Belief {
    loop {
        let b = interior(rng, n, floor);
        let mut v = b.probs().to_vec();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] > gap) {
            return b;
        }
    }
}

/// Belief supported exactly on `states`.
pub fn supported_on(rng: &mut TestRng, n: usize, states: &[usize], floor: f64) -> Belief {
    let inner = interior(rng, states.len(), floor);
    let mut v = vec![0.0; n];
    for (k, &s) in states.iter().enumerate() {
        v[s] = inner.get(k);
    }
    Belief::new(v).unwrap()
}

pub fn sigma(rng: &mut TestRng) -> SigmaSpec {
    if rng.gen_bool(0.5) {
        SigmaSpec::LogShifted { a: rng.gen_range(0.2..5.0), b: rng.gen_range(0.2..3.0) }
    } else {
        SigmaSpec::PowerRenyi { alpha: rng.gen_range(0.1..0.9) }
    }
}

/// Strictly increasing distortion from the catalog.
pub fn monotone_delta(rng: &mut TestRng) -> DeltaSpec {
    match rng.gen_range(0..3) {
        0 => DeltaSpec::Power { alpha: rng.gen_range(0.3..2.5) },
        1 => DeltaSpec::Sigmoid { a: rng.gen_range(1.0..10.0), x0: rng.gen_range(0.2..0.8) },
        _ => DeltaSpec::Identity,
    }
}

/// The five distance families, in a fixed order.
pub const VARIANTS: [&str; 5] = ["bayesian_divergence", "distorted", "mixed", "support_dependent", "euclidean"];

pub fn distance(rng: &mut TestRng, variant: &str, n: usize) -> DistanceSpec {
    let s = sigma(rng);
    match variant {
        "bayesian_divergence" => DistanceSpec::BayesianDivergence { sigma: s },
        "distorted" => DistanceSpec::Distorted { delta: monotone_delta(rng), sigma: s },
        "mixed" => DistanceSpec::Mixed { rho: interior(rng, n, 0.0), sigma: s },
        "support_dependent" => DistanceSpec::SupportDependent { mu_star: interior(rng, n, 0.02), sigma: s },
        "euclidean" => DistanceSpec::Euclidean,
        other => panic!("unknown variant {other}"),
    }
}

/// Random partition ladder: states shuffled into 1..=n nonempty blocks,
/// each level supported on its whole block.
pub fn ladder(rng: &mut TestRng, n: usize) -> Ladder {
    let mut states: Vec<usize> = (0..n).collect();
    states.shuffle(rng);
    let blocks = rng.gen_range(1..=n);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(blocks - 1).collect();
    cuts.sort_unstable();
    let mut levels = Vec::new();
    let mut start = 0;
    for end in cuts.into_iter().chain([n]) {
        let mut block = states[start..end].to_vec();
        block.sort_unstable();
        levels.push(supported_on(rng, n, &block, 0.03));
        start = end;
    }
    Ladder::partition(StateSpace::numbered(n).unwrap(), levels).unwrap()
}

/// Persuasion environment with a mix of aligned and opposed states.
pub fn persuasion_env(rng: &mut TestRng, n: usize, f: DistortionFn, messages: usize) -> PersuasionEnv {
    loop {
        let rho = interior(rng, n, 0.05);
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        u[0] = u[0].abs().max(0.1);
        if let Some(last) = u.last_mut() {
            *last = -last.abs().max(0.1);
        }
        let env = PersuasionEnv::new(rho, u, f.clone(), DistortionFn::Identity, messages).unwrap();
        if env.guard().map_or(false, |g| g < -1e-3) {
            return env;
        }
    }
}

/// Overwrite two posteriors so each event's posterior lives inside the
/// other event and they differ: a revealed-preference cycle.
pub fn plant_cycle(rng: &mut TestRng, fam: &UpdateFamily) -> UpdateFamily {
    let n = fam.n();
    let events: Vec<_> = fam.events().collect();
    loop {
        let a = *events.choose(rng).unwrap();
        let b = *events.choose(rng).unwrap();
        let Some(common) = a.intersect(b) else { continue };
        if a == b || common.len() < 2 {
            continue;
        }
        let shared: Vec<usize> = common.iter().collect();
        let pa = supported_on(rng, n, &shared, 0.05);
        let pb = supported_on(rng, n, &shared, 0.05);
        if pa.sup_dist(&pb) < 1e-3 {
            continue;
        }
        let mut out = fam.clone();
        out.insert(a, pa).unwrap();
        out.insert(b, pb).unwrap();
        return out;
    }
}

/// Replace one posterior with an arbitrary belief on its event.
pub fn perturb_one(rng: &mut TestRng, fam: &UpdateFamily) -> UpdateFamily {
    let events: Vec<_> = fam.events().collect();
    let e = *events.choose(rng).unwrap();
    let states: Vec<usize> = e.iter().collect();
    let k = rng.gen_range(1..=states.len());
    let chosen: Vec<usize> = states.choose_multiple(rng, k).copied().collect();
    let mut chosen = chosen;
    chosen.sort_unstable();
    let mut out = fam.clone();
    out.insert(e, supported_on(rng, fam.n(), &chosen, 0.05)).unwrap();
    out
}

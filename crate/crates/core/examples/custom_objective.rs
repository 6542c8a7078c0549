//! The generic minimizer as an oracle, and on an objective of your own.

use inertia::solver::minimize_objective;
use inertia::{closed_form_posterior, minimize_over_event, Belief, DistanceSpec, Event, NumericPolicy, SigmaSpec, SolverConfig};

fn main() -> inertia::Result<()> {
    let prior = Belief::new(vec![0.5, 0.3, 0.15, 0.05])?;
    let e = Event::new(&[1, 2, 3], 4)?;
    let cfg = SolverConfig::default();
    let d = DistanceSpec::BayesianDivergence { sigma: SigmaSpec::PowerRenyi { alpha: 0.5 } };
    let exact = closed_form_posterior(&d, &prior, e, &NumericPolicy::default())?.expect("regular event");
    let generic = minimize_over_event(&d, &prior, e, &cfg)?;
    println!("closed form {:.6?}\ngeneric     {:.6?}\ngap {:.1e}", exact.probs(), generic.probs(), generic.sup_dist(&exact));

    // Any smooth objective on the face works; here a quadratic pull toward a target.
    let target = [0.0, 0.2, 0.2, 0.6];
    let sol = minimize_objective(
        |y| y.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum(),
        4,
        e,
        &cfg,
        None,
    )?;
    println!("closest point to {target:?} on the face: {:.6?} after {} iterations", sol.x, sol.iters);
    Ok(())
}

//! Recover a prior distortion, up to scale, from observed posteriors.

use inertia::model::complete_family;
use inertia::{fit_distortion, Belief, DeltaSpec, DistanceSpec, IUModel, StateSpace};

fn main() -> inertia::Result<()> {
    let prior = Belief::new(vec![0.5, 0.3, 0.15, 0.05])?;
    let truth = DeltaSpec::Sigmoid { a: 6.0, x0: 0.5 };
    let m = IUModel::new(StateSpace::numbered(4)?, prior.clone(), DistanceSpec::distorted(truth.clone()))?;
    let fitted = fit_distortion(&complete_family(&m)?)?;
    let top = prior.probs().iter().map(|&p| truth.apply(p).unwrap()).fold(0.0, f64::max);
    println!("prior   fitted    true/max");
    for &p in prior.probs() {
        println!("{p:<7} {:<9.6} {:.6}", fitted.apply(p)?, truth.apply(p)? / top);
    }
    Ok(())
}

//! Full posterior tables for distorted Bayesian updating.

use inertia::model::events_of_size;
use inertia::{io, update_family, Belief, DeltaSpec, DistanceSpec, IUModel, StateSpace};

fn main() -> inertia::Result<()> {
    let space = StateSpace::new(["s1", "s2", "s3"])?;
    let prior = Belief::new(vec![0.6, 0.35, 0.05])?;
    let pairs = events_of_size(3, 2);
    for (label, delta) in [
        ("under-reaction, x^0.8", DeltaSpec::Power { alpha: 0.8 }),
        ("over-reaction, x^1.2", DeltaSpec::Power { alpha: 1.2 }),
        ("S-shaped, a=6 x0=0.5", DeltaSpec::Sigmoid { a: 6.0, x0: 0.5 }),
        ("confirmation bias, b=0.1", DeltaSpec::ConfirmationBias { b: 0.1 }),
    ] {
        let m = IUModel::new(space.clone(), prior.clone(), DistanceSpec::distorted(delta))?;
        println!("{label}\n{}", io::family_text(&update_family(&m, &pairs)?));
    }
    Ok(())
}

//! Posteriors under every distance in the catalog after the same news.

use inertia::{iu_posterior, Belief, DeltaSpec, DistanceSpec, IUModel, StateSpace};

fn main() -> inertia::Result<()> {
    let space = StateSpace::new(["s1", "s2", "s3"])?;
    let prior = Belief::new(vec![0.6, 0.35, 0.05])?;
    let news = space.parse_event("s2,s3")?;
    let catalog = [
        DistanceSpec::bayesian(),
        DistanceSpec::distorted(DeltaSpec::Power { alpha: 0.8 }),
        DistanceSpec::distorted(DeltaSpec::Sigmoid { a: 6.0, x0: 0.5 }),
        DistanceSpec::mixed(Belief::new(vec![0.0, 0.0, 1.0])?),
        DistanceSpec::support_dependent(Belief::uniform(3)),
        DistanceSpec::Euclidean,
    ];
    println!("prior {:?}, news {}", prior.probs(), space.format_event(news));
    for d in catalog {
        let m = IUModel::new(space.clone(), prior.clone(), d)?;
        let post = iu_posterior(&m, news)?;
        println!("{:<20} {:.4?}", m.distance.name(), post.probs());
    }
    Ok(())
}

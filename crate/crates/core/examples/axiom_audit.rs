//! Audit an observed family and certify (or refute) an inertial representation.

use inertia::model::complete_family;
use inertia::{rank_certificate, run_all, Belief, DistanceSpec, IUModel, StateSpace};

fn main() -> inertia::Result<()> {
    let space = StateSpace::new(["s1", "s2", "s3"])?;
    let optimist = IUModel::new(
        space,
        Belief::new(vec![0.6, 0.35, 0.05])?,
        DistanceSpec::mixed(Belief::new(vec![0.0, 0.0, 1.0])?),
    )?;
    let fam = complete_family(&optimist)?;
    for r in run_all(&fam) {
        println!("{:<24} {}", r.axiom, if r.passed { "pass" } else { "FAIL" });
        for v in r.violations.iter().take(2) {
            println!("    {} at {:?}", v.message, v.events);
        }
    }
    let levels = rank_certificate(&fam)?;
    println!("rank certificate:");
    for (e, level) in levels {
        println!("  {} -> {level}", fam.name(e));
    }
    Ok(())
}

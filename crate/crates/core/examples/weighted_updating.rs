//! Partial reaction to news and recovering the weight from data.

use inertia::model::complete_family;
use inertia::{audit, recover_wiu, Belief, DistanceSpec, IUModel, StateSpace, WIUModel};

fn main() -> inertia::Result<()> {
    let space = StateSpace::new(["s1", "s2", "s3"])?;
    let base = IUModel::new(space, Belief::new(vec![0.6, 0.35, 0.05])?, DistanceSpec::Euclidean)?;
    let fam = complete_family(&WIUModel::new(base, 0.3)?)?;
    let conseq = audit::check_consequentialism(&fam);
    println!("consequentialism passed: {} ({} witnesses)", conseq.passed, conseq.violations.len());
    let rec = recover_wiu(&fam)?;
    println!("recovered weight on the prior: {:.12}", rec.gamma);
    for (e, b) in rec.surrogates.iter() {
        println!("  underlying {} -> {:.4?}", rec.surrogates.name(e), b.probs());
    }
    Ok(())
}

//! A ladder of beliefs for surprising news, and the distance behind it.

use inertia::cps::{check_cps, cps_distance, ladder_from_family};
use inertia::model::complete_family;
use inertia::{cps_posterior, Belief, Ladder, SigmaSpec, SolverConfig, StateSpace};

fn main() -> inertia::Result<()> {
    // Fair coin; if it lands on its edge, a second belief; failing that, a third.
    let space = StateSpace::new(["h", "t", "e", "e'", "l1", "l2"])?;
    let ladder = Ladder::partition(
        space.clone(),
        vec![
            Belief::new(vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0])?,
            Belief::new(vec![0.0, 0.0, 0.875, 0.125, 0.0, 0.0])?,
            Belief::new(vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.5])?,
        ],
    )?;
    let dist = cps_distance(&ladder, SigmaSpec::default())?;
    for text in ["h,t", "e,e',l1,l2", "e',l1,l2", "l1"] {
        let e = space.parse_event(text)?;
        let post = cps_posterior(&ladder, e)?;
        let argmin = dist.minimize(e, &SolverConfig::default())?;
        println!("{:<14} {:.4?}  (distance argmin within {:.1e})", space.format_event(e), post.probs(), argmin.sup_dist(&post));
    }
    let fam = complete_family(&ladder)?;
    println!("check_cps on all {} events: {}", fam.len(), check_cps(&fam).passed);
    println!("extracted ladder has {} levels", ladder_from_family(&fam)?.levels().len());
    Ok(())
}

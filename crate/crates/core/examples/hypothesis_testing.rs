//! Turn a thresholded ladder into an equivalent hypothesis-testing model.

use inertia::cps::ht_select;
use inertia::{ecps_posterior, ht_from_ecps, Belief, Ladder, StateSpace};

fn main() -> inertia::Result<()> {
    let space = StateSpace::new(["h", "t", "e", "e'", "l1", "l2"])?;
    let ladder = Ladder::partition(
        space.clone(),
        vec![
            Belief::new(vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0])?,
            Belief::new(vec![0.0, 0.0, 0.875, 0.125, 0.0, 0.0])?,
            Belief::new(vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.5])?,
        ],
    )?;
    for eps in [0.0, 0.2] {
        let c = ht_from_ecps(&ladder, eps)?;
        println!("ladder threshold {eps}: test threshold {:.4}, {} atoms, {} events verified",
            c.model.epsilon(), c.model.atoms().len(), c.events_checked);
        for text in ["h,e", "e',l1,l2", "e,l2"] {
            let e = space.parse_event(text)?;
            let choice = ht_select(&c.model, e)?;
            let branch = choice.atom.map_or("bayes".to_string(), |a| format!("atom {a}"));
            let same = ecps_posterior(&ladder, eps, e).map(|b| b.sup_dist(&choice.posterior) < 1e-12);
            println!("  {:<12} {branch:<7} {:.4?} agrees: {same:?}", space.format_event(e), choice.posterior.probs());
        }
    }
    Ok(())
}

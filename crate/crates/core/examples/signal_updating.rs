//! Distorted updating on signals: base-rate neglect and over-reaction.

use inertia::signal::grether_distance_check;
use inertia::{grether_posterior, Belief, DistortionFn, SignalModel};

fn main() -> inertia::Result<()> {
    for (alpha, beta) in [(1.0, 1.0), (0.8, 1.4), (0.8, 0.8), (1.2, 1.0)] {
        let m = SignalModel::new(
            vec!["high".into(), "low".into()],
            vec!["h".into(), "l".into()],
            Belief::new(vec![0.625, 0.375])?,
            vec![vec![0.6, 0.4], vec![0.4, 0.6]],
            DistortionFn::power(beta),
            DistortionFn::power(alpha),
        )?;
        let h = grether_posterior(&m, 0)?;
        let l = grether_posterior(&m, 1)?;
        let ok = (0..2).all(|k| grether_distance_check(&m, k).passed);
        println!("prior^{alpha} likelihood^{beta}: P(high|h) = {:.4}, P(high|l) = {:.4}, minimizes distance: {ok}", h.get(0), l.get(0));
    }
    Ok(())
}

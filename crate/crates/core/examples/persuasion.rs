//! Optimal signals for a sender facing a receiver who distorts likelihoods.

use inertia::persuasion::first_message_value;
use inertia::{grid_oracle, optimize_binary, optimize_rich, Belief, DistortionFn, PersuasionEnv};

fn main() -> inertia::Result<()> {
    let rho = Belief::new(vec![1.0 / 7.0, 3.0 / 7.0, 3.0 / 7.0])?;
    for beta in [0.5, 1.0, 2.0] {
        let env = PersuasionEnv::new(rho.clone(), vec![1.0, -0.5, -1.0], DistortionFn::power(beta), DistortionFn::Identity, 2)?;
        let sol = optimize_binary(&env)?;
        let grid = grid_oracle(&env, 0.01)?;
        println!(
            "beta {beta}: {:?} sends a with {:.4?}, value {:.4} (grid {:.4})",
            sol.regime, sol.signal.pi[0], sol.sender_value, first_message_value(&env, &grid)
        );
    }
    for beta in [0.5, 2.0] {
        let env = PersuasionEnv::new(rho.clone(), vec![1.0, -0.5, -1.0], DistortionFn::power(beta), DistortionFn::Identity, 3)?;
        let sol = optimize_rich(&env, 2)?;
        println!("three messages, beta {beta}: relaxed value {:.4}, realized {:.4}", sol.relaxed_value.unwrap_or(f64::NAN), sol.sender_value);
        for (m, row) in sol.signal.pi.iter().enumerate() {
            println!("  m{} -> {:?}: {:.4?}", m + 1, sol.receiver_actions[m], row);
        }
    }
    Ok(())
}

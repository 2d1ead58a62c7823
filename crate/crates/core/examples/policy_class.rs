//! How many policies are optimal for some reward, as the discount grows,
//! plus the reward certificates that back the counts.

use horizon_irl::error::Result;
use horizon_irl::mdp::{optimal_policy, random_dynamics};
use horizon_irl::seed;
use horizon_irl::theory::{
    enumerate_policy_class, gamma_lift_certificate, looping_class, looping_dynamics, sample_separable_reward,
    verify_expert_optimal,
};

fn main() -> Result<()> {
    let dynamics = random_dynamics(4, 2, 1)?;
    for gamma in [0.0, 0.3, 0.6, 0.9, 0.99] {
        let class = enumerate_policy_class(&dynamics, gamma, 400, 5)?;
        println!("random MDP, gamma {gamma:<4}: {} distinct optimal policies", class.len());
    }

    let looping = looping_dynamics(3, 2)?;
    for gamma in [0.5, 0.99] {
        let sampled = enumerate_policy_class(&looping, gamma, 400, 5)?;
        println!(
            "looping MDP, gamma {gamma:<4}: {} constructed, {} sampled optimal policies",
            looping_class(3, 2, gamma)?.len(),
            sampled.len()
        );
    }

    let mut rng = seed::rng(2);
    let reward = sample_separable_reward(4, 2, &mut rng);
    let pi = optimal_policy(&dynamics, &reward, 0.3)?;
    let lifted = gamma_lift_certificate(&dynamics, &reward, &pi, 0.3, 0.6)?;
    let check = verify_expert_optimal(&dynamics, &lifted, &pi, 0.6)?;
    println!("policy optimal at 0.3 stays optimal at 0.6 under the lifted reward: {}", check.holds);
    Ok(())
}

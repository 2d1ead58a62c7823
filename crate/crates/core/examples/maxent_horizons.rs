//! MaxEnt IRL on Objectworld with several finite horizons.

use horizon_irl::env::{make_objectworld, ObjectworldSpec};
use horizon_irl::error::Result;
use horizon_irl::maxent::{train_maxent, MaxEntConfig};
use horizon_irl::mdp::finite_horizon_policy;
use horizon_irl::select::{state_error_count, trajectories_for, Scenario};

fn main() -> Result<()> {
    let env = make_objectworld(&ObjectworldSpec::linear(5))?;
    let scenario = Scenario::from_env(&env);
    let config = MaxEntConfig { epochs: 60, restarts: 2, ..MaxEntConfig::default() };
    for horizon in [1, 2, 5, 10, 20] {
        let trajs = trajectories_for(&scenario, 200, horizon, 9)?;
        let fit = train_maxent(env.mdp.dynamics(), &env.features, &trajs, &config, 4)?;
        let policy = finite_horizon_policy(env.mdp.dynamics(), &fit.reward, horizon)?;
        println!(
            "T = {horizon:>2}: {:>3} trajectories, |grad|_1 = {:.4}, errors = {}",
            trajs.len(),
            fit.gradient_l1,
            state_error_count(&policy, &env.expert, None)
        );
    }
    Ok(())
}

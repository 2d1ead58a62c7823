//! LP-IRL on one Gridworld at several discount factors and data amounts.

use horizon_irl::demos::sample_pairs;
use horizon_irl::env::{make_gridworld, GridSpec};
use horizon_irl::error::Result;
use horizon_irl::experiment::demo_count;
use horizon_irl::select::{lp_induced_policy, state_error_count, Scenario};
use horizon_irl::lp::LpIrlConfig;

fn main() -> Result<()> {
    let env = make_gridworld(&GridSpec::simple(3))?;
    let scenario = Scenario::from_env(&env);
    let gammas = [0.1, 0.3, 0.5, 0.7, 0.9, 0.99];
    print!("{:>6}", "data%");
    for g in gammas {
        print!("{g:>7}");
    }
    println!();
    for pct in [10.0, 30.0, 100.0] {
        let demos = sample_pairs(&env.expert, env.mdp.n_actions(), demo_count(pct, env.n_states()), 1)?;
        print!("{pct:>6}");
        for g in gammas {
            let policy = lp_induced_policy(&scenario, &demos, g, &LpIrlConfig::default())?;
            print!("{:>7}", state_error_count(&policy, &env.expert, None));
        }
        println!();
    }
    println!("(entries are states where the learned policy disagrees with the expert)");
    Ok(())
}

//! Generate one environment per task, save it, reload it and check the
//! expert is still optimal for the stored reward.

use horizon_irl::env::{read_environment, write_environment, GAMMA0};
use horizon_irl::error::Result;
use horizon_irl::experiment::Task;
use horizon_irl::select::state_error_count;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("horizon-irl-env-roundtrip");
    std::fs::create_dir_all(&dir)?;
    for task in Task::ALL {
        let env = task.build(7)?;
        let path = dir.join(format!("{}.env", task.name()));
        write_environment(&path, &env)?;
        let back = read_environment(&path)?;
        assert_eq!(back.mdp.rewards(), env.mdp.rewards());
        let replanned = back.mdp.optimal_policy(GAMMA0)?;
        println!(
            "{:<22} {} states, {} features, expert mismatches after reload: {}",
            task.name(),
            back.n_states(),
            back.features.features.ncols(),
            state_error_count(&replanned, &back.expert, None)
        );
    }
    println!("files in {}", dir.display());
    Ok(())
}

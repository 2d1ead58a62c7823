//! Pick the discount factor for LP-IRL by cross-validation and compare
//! with the all-data oracle.

use horizon_irl::demos::sample_pairs;
use horizon_irl::env::{make_gridworld, GridSpec, GAMMA0};
use horizon_irl::error::Result;
use horizon_irl::select::{cross_validate, oracle_select, Candidate, CandidateGrid, LearnerKind, Scenario, SelectionConfig};

fn main() -> Result<()> {
    let env = make_gridworld(&GridSpec::simple(21))?;
    let scenario = Scenario::from_env(&env);
    let demos = sample_pairs(&env.expert, env.mdp.n_actions(), 30, 2)?;
    let grid = CandidateGrid::discount_even(10, GAMMA0)?;
    let config = SelectionConfig::new(LearnerKind::Lp);
    let cv = cross_validate(&scenario, &demos, &grid, &config, 8)?;
    let oracle = oracle_select(&scenario, &demos, &grid.with(Candidate::Discount(GAMMA0))?, &config, 8)?;
    println!("{:>8} {:>10} {:>10}", "gamma", "held-out", "all-data");
    for (i, c) in grid.candidates().iter().enumerate() {
        let j = oracle.candidates.iter().position(|x| x == c).unwrap();
        println!("{:>8.4} {:>10} {:>10}", c.value(), cv.validation_errors[i], oracle.full_errors[j]);
    }
    println!("cross-validation picks {:.4}, oracle picks {:.4}", cv.chosen.value(), oracle.chosen.value());
    Ok(())
}

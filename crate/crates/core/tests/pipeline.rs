//! Environment through demonstrations, learners and selection.

use horizon_irl::demos::{estimate_policy, sample_pairs, DemonstrationSet};
use horizon_irl::env::{make_gridworld, parse_environment, render_environment, GridSpec, GAMMA0};
use horizon_irl::experiment::{demo_count, run_sweep, run_sweep_limited, ExperimentConfig, RESULTS_FILE, SELECTIONS_FILE};
use horizon_irl::lp::{estimate_expert_transitions, lp_irl, mapping_matrix, LpIrlConfig};
use horizon_irl::mdp::optimal_policy;
use horizon_irl::select::{
    cross_validate, oracle_select, state_error_count, Candidate, CandidateGrid, LearnerKind, Scenario, SelectionConfig,
};
use proptest::prelude::*;

#[test]
fn lp_reward_satisfies_its_margin_on_demonstrated_states() {
    let env = make_gridworld(&GridSpec::simple(12)).unwrap();
    let demos = sample_pairs(&env.expert, env.mdp.n_actions(), demo_count(30.0, env.n_states()), 4).unwrap();
    for gamma in [0.2, 0.7, GAMMA0] {
        let fit = lp_irl(env.mdp.dynamics(), &demos, gamma, env.mdp.r_max(), &LpIrlConfig::default()).unwrap();
        let est = estimate_policy(&demos);
        let pe = estimate_expert_transitions(env.mdp.dynamics(), &est).unwrap();
        let fmap = mapping_matrix(env.mdp.dynamics(), &pe, &est, gamma).unwrap();
        for &(s, a) in &fmap.constrained {
            let value = (fmap.row(s, a) * &fit.state_reward)[0];
            assert!(value >= fit.margin - 1e-7, "state {s} action {a}: {value}");
        }
        assert!(fit.state_reward.amax() <= env.mdp.r_max() + 1e-9);
    }
}

#[test]
fn complete_demonstrations_pin_down_most_actions() {
    let env = make_gridworld(&GridSpec::simple(2)).unwrap();
    let pairs: Vec<(usize, usize)> = env.expert.actions.iter().copied().enumerate().collect();
    let demos = DemonstrationSet::from_pairs(pairs, env.n_states(), env.mdp.n_actions(), 0).unwrap();
    let fit = lp_irl(env.mdp.dynamics(), &demos, GAMMA0, env.mdp.r_max(), &LpIrlConfig::default()).unwrap();
    let policy = optimal_policy(env.mdp.dynamics(), &fit.reward, GAMMA0).unwrap();
    let few = sample_pairs(&env.expert, env.mdp.n_actions(), 10, 0).unwrap();
    let sparse = lp_irl(env.mdp.dynamics(), &few, GAMMA0, env.mdp.r_max(), &LpIrlConfig::default()).unwrap();
    let sparse_policy = optimal_policy(env.mdp.dynamics(), &sparse.reward, GAMMA0).unwrap();
    assert!(state_error_count(&policy, &env.expert, None) <= state_error_count(&sparse_policy, &env.expert, None));
}

#[test]
fn environment_text_survives_a_round_trip() {
    let env = make_gridworld(&GridSpec::hard(8)).unwrap();
    let text = render_environment(&env);
    let back = parse_environment(&text).unwrap();
    assert_eq!(render_environment(&back), text);
    assert_eq!(back.expert, env.expert);
}

#[test]
fn oracle_never_does_worse_than_the_cross_validated_choice() {
    let env = make_gridworld(&GridSpec::simple(30)).unwrap();
    let scenario = Scenario::from_env(&env);
    let demos = sample_pairs(&env.expert, env.mdp.n_actions(), 40, 1).unwrap();
    let grid = CandidateGrid::discount_even(6, GAMMA0).unwrap();
    let config = SelectionConfig::new(LearnerKind::Lp);
    let cv = cross_validate(&scenario, &demos, &grid, &config, 3).unwrap();
    let oracle = oracle_select(&scenario, &demos, &grid.with(Candidate::Discount(GAMMA0)).unwrap(), &config, 3).unwrap();
    let at = |c: Candidate| oracle.full_errors[oracle.candidates.iter().position(|&x| x == c).unwrap()];
    assert!(oracle.full_errors[oracle.chosen_index] <= at(cv.chosen));
    assert_eq!(oracle.chosen_index, oracle.full_errors.iter().position(|&e| e == *oracle.full_errors.iter().min().unwrap()).unwrap());
}

#[test]
fn maxent_selection_covers_the_horizon_grid() {
    let env = horizon_irl::experiment::Task::ObjectworldLinear.build(4).unwrap();
    let scenario = Scenario::from_env(&env);
    let demos = sample_pairs(&env.expert, env.mdp.n_actions(), 60, 2).unwrap();
    let grid = CandidateGrid::horizon_range(3, 6).unwrap();
    let mut config = SelectionConfig::new(LearnerKind::MaxEnt);
    config.maxent.epochs = 20;
    config.maxent.restarts = 1;
    let cv = cross_validate(&scenario, &demos, &grid, &config, 5).unwrap();
    assert_eq!(cv.candidates, grid.candidates());
    assert!(cv.validation_errors.iter().zip(&cv.full_errors).all(|(v, f)| *v <= 100 && *f <= 100));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    // stopping after any number of cells and resuming gives the same files
    #[test]
    fn interrupted_sweeps_resume_to_the_same_files(stop in 0usize..4, base_seed in 0u64..1000) {
        let config = |dir: &std::path::Path| ExperimentConfig {
            data_percentages: vec![10.0, 20.0],
            grid_size: 2,
            n_environments: 2,
            base_seed,
            out_dir: dir.to_path_buf(),
            ..ExperimentConfig::default()
        };
        let whole = tempfile::tempdir().unwrap();
        let parts = tempfile::tempdir().unwrap();
        run_sweep(&config(whole.path())).unwrap();
        prop_assert!(run_sweep_limited(&config(parts.path()), Some(stop)).unwrap().is_none());
        run_sweep(&config(parts.path())).unwrap();
        for f in [RESULTS_FILE, SELECTIONS_FILE] {
            prop_assert_eq!(std::fs::read(whole.path().join(f)).unwrap(), std::fs::read(parts.path().join(f)).unwrap());
        }
    }
}

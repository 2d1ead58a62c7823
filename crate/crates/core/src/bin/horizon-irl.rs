#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use horizon_irl::demos::sample_pairs;
use horizon_irl::env::{read_environment, write_environment, Environment, GAMMA0};
use horizon_irl::error::{Error, Result};
use horizon_irl::experiment::{self, demo_count, ExperimentConfig, Task};
use horizon_irl::io::{fmt_real, write_reward_csv, write_text, write_weights_csv};
use horizon_irl::lp::{lp_irl, LpIrlConfig};
use horizon_irl::maxent::{train_maxent, MaxEntConfig};
use horizon_irl::mdp::{finite_horizon_policy, optimal_policy};
use horizon_irl::plot::{emit_plots, heatmap_svg};
use horizon_irl::select::{
    cross_validate, oracle_select, state_error_count, trajectories_for, LearnerKind, Scenario, SelectionConfig,
};
use horizon_irl::seed;
use horizon_irl::theory::{
    enumerate_policy_class, looping_class, looping_dynamics, sample_size_bound, write_bound_csv, BoundInputs,
};

#[derive(Parser)]
#[command(name = "horizon-irl", version, about = "Inverse RL with an effective planning horizon")]
struct Cli {
    /// Base seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate environments and write them as text files.
    GenEnv {
        #[arg(long, default_value = "gridworld-simple", value_parser = parse_task)]
        task: Task,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Fit LP-IRL at one discount factor.
    RunLp {
        #[command(flatten)]
        source: EnvSource,
        #[arg(long, default_value_t = GAMMA0)]
        gamma: f64,
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Fit MaxEnt IRL at one horizon.
    RunMaxent {
        #[command(flatten)]
        source: EnvSource,
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        #[arg(long, default_value_t = MaxEntConfig::default().epochs)]
        epochs: usize,
        #[arg(long, default_value_t = MaxEntConfig::default().learning_rate)]
        learning_rate: f64,
        #[arg(long, default_value_t = MaxEntConfig::default().restarts)]
        restarts: usize,
    },
    /// Cross-validate the discount or horizon on one environment.
    CrossValidate {
        #[command(flatten)]
        source: EnvSource,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run a full sweep and write results, selections and summary CSVs.
    Sweep {
        /// Flat TOML config; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_task)]
        task: Option<Task>,
        #[arg(long, value_parser = parse_learner)]
        learner: Option<LearnerKind>,
        #[arg(long)]
        gamma0: Option<f64>,
        #[arg(long)]
        horizon0: Option<usize>,
        #[arg(long)]
        grid_size: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        percentages: Option<Vec<f64>>,
        #[arg(long)]
        environments: Option<usize>,
    },
    /// Bound evaluation and policy-class enumeration.
    Theory {
        #[command(subcommand)]
        check: TheoryCommand,
    },
    /// Draw SVG charts from a sweep directory.
    Plot {
        /// Directory holding summary.csv (and optionally selections.csv).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_task)]
        task: Option<Task>,
    },
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// Evaluate the sample-size bound for several N.
    Bound {
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        gamma_hat: f64,
        #[arg(long, default_value_t = GAMMA0)]
        gamma0: f64,
        #[arg(long, default_value_t = 1.0)]
        r_max: f64,
        #[arg(long, default_value_t = 100)]
        states: usize,
        #[arg(long, default_value_t = 1)]
        class_size: usize,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Count optimal policies on the looping construction.
    PolicyClass {
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        actions: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,0.9,0.99")]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Args)]
struct EnvSource {
    /// Environment file from gen-env; otherwise one is generated.
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long, default_value = "gridworld-simple", value_parser = parse_task)]
    task: Task,
    #[arg(long, default_value_t = 0)]
    env_index: usize,
    /// Expert data as a percentage of the state count.
    #[arg(long, default_value_t = 30.0)]
    percent: f64,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value = "lp", value_parser = parse_learner)]
    learner: LearnerKind,
    #[arg(long, default_value_t = 20)]
    grid_size: usize,
    #[arg(long, default_value_t = GAMMA0)]
    gamma0: f64,
    #[arg(long, default_value_t = 20)]
    horizon0: usize,
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    Task::from_name(s).ok_or_else(|| format!("unknown task {s:?}"))
}

fn parse_learner(s: &str) -> std::result::Result<LearnerKind, String> {
    LearnerKind::from_name(s).ok_or_else(|| format!("unknown learner {s:?}"))
}

impl EnvSource {
    fn load(&self, base_seed: u64) -> Result<Environment> {
        match &self.env {
            Some(path) => read_environment(path),
            None => self.task.build(seed::env_seed(base_seed, self.task.index(), self.env_index as u32)),
        }
    }
}

fn job_seed(base: u64, env: &Environment) -> u64 {
    seed::derive(base, env.seed)
}

fn sample_demos(env: &Environment, percent: f64, seed: u64) -> Result<horizon_irl::demos::DemonstrationSet> {
    if !(percent > 0.0) {
        return Err(Error::InvalidArgument("--percent must be positive".into()));
    }
    let n = demo_count(percent, env.n_states()).max(1);
    sample_pairs(&env.expert, env.mdp.n_actions(), n, seed)
}

fn state_rewards(reward: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    reward.column(0).iter().copied().collect()
}

fn run(cli: Cli) -> Result<()> {
    let out = &cli.out_dir;
    std::fs::create_dir_all(out)?;
    match cli.command {
        Command::GenEnv { task, count } => {
            for i in 0..count {
                let env = task.build(seed::env_seed(cli.seed, task.index(), i as u32))?;
                let path = out.join(format!("{}_{i}.env", task.name()));
                write_environment(&path, &env)?;
                let true_reward = state_rewards(env.mdp.rewards());
                write_text(&path.with_extension("svg"), &heatmap_svg("true reward", &true_reward, env.width))?;
                println!("{}", path.display());
            }
        }
        Command::RunLp { source, gamma, margin } => {
            let env = source.load(cli.seed)?;
            let demos = sample_demos(&env, source.percent, job_seed(cli.seed, &env))?;
            let fit = lp_irl(env.mdp.dynamics(), &demos, gamma, env.mdp.r_max(), &LpIrlConfig { margin })?;
            let policy = optimal_policy(env.mdp.dynamics(), &fit.reward, gamma)?;
            demos.write_csv(&out.join("demos.csv"))?;
            write_reward_csv(&out.join("reward.csv"), &fit.reward)?;
            write_text(&out.join("reward.svg"), &heatmap_svg("learned reward", &state_rewards(&fit.reward), env.width))?;
            println!("pairs {}", demos.len());
            println!("margin {}", fmt_real(fit.margin));
            println!("objective {}", fmt_real(fit.objective_value));
            println!("state_errors {}", state_error_count(&policy, &env.expert, None));
        }
        Command::RunMaxent { source, horizon, epochs, learning_rate, restarts } => {
            let env = source.load(cli.seed)?;
            let scenario = Scenario::from_env(&env);
            let n_pairs = demo_count(source.percent, env.n_states()).max(horizon);
            let s = job_seed(cli.seed, &env);
            let trajs = trajectories_for(&scenario, n_pairs, horizon, s)?;
            let config = MaxEntConfig { epochs, learning_rate, restarts };
            let fit = train_maxent(env.mdp.dynamics(), &env.features, &trajs, &config, seed::derive(s, 1))?;
            let policy = finite_horizon_policy(env.mdp.dynamics(), &fit.reward, horizon)?;
            write_weights_csv(&out.join("weights.csv"), &fit.weights.theta)?;
            write_reward_csv(&out.join("reward.csv"), &fit.reward)?;
            write_text(&out.join("reward.svg"), &heatmap_svg("learned reward", &state_rewards(&fit.reward), env.width))?;
            println!("trajectories {}", trajs.len());
            println!("gradient_l1 {}", fmt_real(fit.gradient_l1));
            println!("state_errors {}", state_error_count(&policy, &env.expert, None));
        }
        Command::CrossValidate { source, grid } => {
            let env = source.load(cli.seed)?;
            let config = ExperimentConfig {
                learner: grid.learner,
                grid_size: grid.grid_size,
                gamma0: grid.gamma0,
                horizon0: grid.horizon0,
                ..ExperimentConfig::default()
            };
            config.validate()?;
            let candidates = config.grid()?;
            let s = job_seed(cli.seed, &env);
            let demos = sample_demos(&env, source.percent, s)?;
            let scenario = Scenario::from_env(&env);
            let sel = SelectionConfig::new(grid.learner);
            let cv = cross_validate(&scenario, &demos, &candidates, &sel, seed::derive(s, 1))?;
            let oracle = oracle_select(&scenario, &demos, &candidates.with(config.reference())?, &sel, seed::derive(s, 1))?;
            cv.write_csv(&out.join("cross_validation.csv"))?;
            oracle.write_csv(&out.join("oracle.csv"))?;
            println!("cv_choice {}", cv.chosen);
            println!("oracle_choice {}", oracle.chosen);
        }
        Command::Sweep { config, task, learner, gamma0, horizon0, grid_size, percentages, environments } => {
            let mut c = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig { base_seed: cli.seed, ..ExperimentConfig::default() },
            };
            c.out_dir = out.clone();
            c.task = task.unwrap_or(c.task);
            c.learner = learner.unwrap_or(c.learner);
            c.gamma0 = gamma0.unwrap_or(c.gamma0);
            c.horizon0 = horizon0.unwrap_or(c.horizon0);
            c.grid_size = grid_size.unwrap_or(c.grid_size);
            c.data_percentages = percentages.unwrap_or(c.data_percentages);
            c.n_environments = environments.unwrap_or(c.n_environments);
            let result = experiment::run_sweep(&c)?;
            println!("records {} ({} new cells)", result.records.len(), result.cells_run);
        }
        Command::Theory { check } => match check {
            TheoryCommand::Bound { n, gamma_hat, gamma0, r_max, states, class_size, delta } => {
                let reports = n
                    .iter()
                    .map(|&n| sample_size_bound(&BoundInputs { n, gamma_hat, gamma0, r_max, n_states: states, class_size, delta }))
                    .collect::<Result<Vec<_>>>()?;
                write_bound_csv(&out.join("bound.csv"), &reports)?;
                for r in &reports {
                    println!("N {} term1 {} term2 {} rhs {}", r.n.unwrap_or(0), fmt_real(r.term1), fmt_real(r.term2), fmt_real(r.rhs));
                }
            }
            TheoryCommand::PolicyClass { states, actions, gamma, samples } => {
                let dynamics = looping_dynamics(states, actions)?;
                for g in gamma {
                    let sampled = enumerate_policy_class(&dynamics, g, samples, cli.seed)?;
                    let constructed = looping_class(states, actions, g)?;
                    println!("gamma {} sampled {} constructed {}", fmt_real(g), sampled.len(), constructed.len());
                }
            }
        },
        Command::Plot { input, task } => {
            let summary = experiment::read_summary_csv(&input.join(experiment::SUMMARY_FILE))?;
            let selections_path = input.join(experiment::SELECTIONS_FILE);
            let selections = if selections_path.exists() { experiment::read_selections_csv(&selections_path)? } else { Vec::new() };
            for path in emit_plots(&summary, &selections, out, task)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Infeasible | Error::Unbounded => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! Choosing the effective discount or horizon: state error counts,
//! cross-validation over a candidate grid, and the all-data oracle.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;

use crate::demos::{sample_trajectories, split_train_validation, split_trajectories, DemonstrationSet, TrajectorySet};
use crate::env::{Environment, FeatureMatrix};
use crate::error::{Error, Result};
use crate::io::fmt_real;
use crate::lp::{lp_irl, LpIrlConfig};
use crate::maxent::{train_maxent, MaxEntConfig};
use crate::mdp::{finite_horizon_policy, optimal_policy, DeterministicPolicy, Dynamics};
use crate::seed;

/// A discount factor (LP learner) or a horizon (MaxEnt learner).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Candidate {
    Discount(f64),
    Horizon(usize),
}

impl Candidate {
    pub fn value(self) -> f64 {
        match self {
            Candidate::Discount(g) => g,
            Candidate::Horizon(t) => t as f64,
        }
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Candidate::Discount(g) => f.write_str(&fmt_real(*g)),
            Candidate::Horizon(t) => write!(f, "{t}"),
        }
    }
}

/// Strictly increasing candidates, all of one kind.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateGrid {
    candidates: Vec<Candidate>,
}

impl CandidateGrid {
    pub fn new(candidates: Vec<Candidate>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::invalid("candidate grid is empty"));
        }
        let discounts = matches!(candidates[0], Candidate::Discount(_));
        for c in &candidates {
            match *c {
                Candidate::Discount(g) if discounts && (0.0..1.0).contains(&g) => {}
                Candidate::Horizon(t) if !discounts && t >= 1 => {}
                _ => return Err(Error::invalid(format!("bad or mixed candidate {c:?}"))),
            }
        }
        if candidates.windows(2).any(|w| w[0].value() >= w[1].value()) {
            return Err(Error::invalid("candidates must be strictly increasing"));
        }
        Ok(CandidateGrid { candidates })
    }

    /// `m` evenly spaced discounts `γ0·(k + ½)/m`, all inside `(0, γ0)`.
    pub fn discount_even(m: usize, gamma0: f64) -> Result<Self> {
        if m == 0 || !(gamma0 > 0.0 && gamma0 < 1.0) {
            return Err(Error::invalid("need m ≥ 1 and γ0 in (0, 1)"));
        }
        Self::new((0..m).map(|k| Candidate::Discount(gamma0 * (k as f64 + 0.5) / m as f64)).collect())
    }

    /// Up to `m` distinct horizons spread over `[1, t0]`; all of them when
    /// `m ≥ t0`, and `[t0]` when `m = 1`.
    pub fn horizon_range(m: usize, t0: usize) -> Result<Self> {
        if m == 0 || t0 == 0 {
            return Err(Error::invalid("need m ≥ 1 and T0 ≥ 1"));
        }
        let mut values: Vec<usize> = if m == 1 {
            vec![t0]
        } else if m >= t0 {
            (1..=t0).collect()
        } else {
            (0..m).map(|k| 1 + ((k * (t0 - 1)) as f64 / (m - 1) as f64).round() as usize).collect()
        };
        values.dedup();
        Self::new(values.into_iter().map(Candidate::Horizon).collect())
    }

    /// This grid with `extra` inserted in order (no-op if present).
    pub fn with(&self, extra: Candidate) -> Result<Self> {
        let mut c = self.candidates.clone();
        if !c.contains(&extra) {
            c.push(extra);
            c.sort_by(|a, b| a.value().total_cmp(&b.value()));
        }
        Self::new(c)
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn is_discount(&self) -> bool {
        matches!(self.candidates[0], Candidate::Discount(_))
    }
}

/// Number of states (all, or only those listed) where the two policies
/// pick different actions.
pub fn state_error_count(induced: &DeterministicPolicy, expert: &DeterministicPolicy, states: Option<&[usize]>) -> usize {
    match states {
        Some(list) => list.iter().filter(|&&s| induced.actions[s] != expert.actions[s]).count(),
        None => induced.actions.iter().zip(&expert.actions).filter(|(a, b)| a != b).count(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Lp,
    MaxEnt,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Lp => "lp",
            LearnerKind::MaxEnt => "maxent",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "lp" => Some(LearnerKind::Lp),
            "maxent" => Some(LearnerKind::MaxEnt),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionConfig {
    pub learner: LearnerKind,
    pub lp: LpIrlConfig,
    pub maxent: MaxEntConfig,
    pub train_fraction: f64,
}

impl SelectionConfig {
    pub fn new(learner: LearnerKind) -> Self {
        SelectionConfig { learner, lp: LpIrlConfig::default(), maxent: MaxEntConfig::default(), train_fraction: 0.8 }
    }
}

/// The pieces of an environment the learners need.
#[derive(Clone, Copy, Debug)]
pub struct Scenario<'a> {
    pub dynamics: &'a Dynamics,
    pub features: &'a FeatureMatrix,
    pub expert: &'a DeterministicPolicy,
    pub r_max: f64,
}

impl<'a> Scenario<'a> {
    pub fn from_env(env: &'a Environment) -> Self {
        Scenario { dynamics: env.mdp.dynamics(), features: &env.features, expert: &env.expert, r_max: env.mdp.r_max() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    pub candidates: Vec<Candidate>,
    pub chosen_index: usize,
    pub chosen: Candidate,
    /// The selection criterion: held-out errors for cross-validation,
    /// all-state errors for the oracle.
    pub validation_errors: Vec<usize>,
    /// Errors over every state against the true expert, for the model the
    /// criterion was computed from.
    pub full_errors: Vec<usize>,
    /// `false` where the learner failed and worst-case counts were recorded.
    pub feasible: Vec<bool>,
}

impl SelectionResult {
    fn from_outcomes(candidates: Vec<Candidate>, outcomes: Vec<Outcome>) -> Self {
        let validation_errors: Vec<usize> = outcomes.iter().map(|o| o.criterion).collect();
        let chosen_index = argmin_first(&validation_errors);
        SelectionResult {
            chosen: candidates[chosen_index],
            chosen_index,
            candidates,
            full_errors: outcomes.iter().map(|o| o.full).collect(),
            feasible: outcomes.iter().map(|o| o.feasible).collect(),
            validation_errors,
        }
    }

    /// `candidate,validation_errors,full_state_errors`
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["candidate", "validation_errors", "full_state_errors"])?;
        for i in 0..self.candidates.len() {
            w.write_record([
                self.candidates[i].to_string(),
                self.validation_errors[i].to_string(),
                self.full_errors[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Index of the first minimum.
pub fn argmin_first(values: &[usize]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

struct Outcome {
    criterion: usize,
    full: usize,
    feasible: bool,
}

fn split_seed(seed: u64) -> u64 {
    seed::derive(seed, 1)
}

fn trajectory_seed(seed: u64, horizon: usize) -> u64 {
    seed::derive(seed::derive(seed, 2), horizon as u64)
}

fn training_seed(seed: u64) -> u64 {
    seed::derive(seed, 3)
}

/// Learner failures that are scored as worst case rather than aborting.
fn is_soft_failure(e: &Error) -> bool {
    matches!(e, Error::Infeasible | Error::Unbounded | Error::InvalidArgument(_))
}

/// Learn from LP demonstrations at a discount and return the greedy policy.
pub fn lp_induced_policy(
    scenario: &Scenario,
    demos: &DemonstrationSet,
    gamma: f64,
    config: &LpIrlConfig,
) -> Result<DeterministicPolicy> {
    let fit = lp_irl(scenario.dynamics, demos, gamma, scenario.r_max, config)?;
    optimal_policy(scenario.dynamics, &fit.reward, gamma)
}

/// Learn from trajectories at a horizon and return the greedy first-step
/// policy of the finite-horizon problem.
pub fn maxent_induced_policy(
    scenario: &Scenario,
    trajs: &TrajectorySet,
    config: &MaxEntConfig,
    seed: u64,
) -> Result<DeterministicPolicy> {
    let fit = train_maxent(scenario.dynamics, scenario.features, trajs, config, seed)?;
    finite_horizon_policy(scenario.dynamics, &fit.reward, trajs.horizon)
}

/// Distinct states of a set of pairs, with the demonstrated action.
fn labelled_states(pairs: impl IntoIterator<Item = (usize, usize)>, n_states: usize) -> Vec<(usize, usize)> {
    let mut label = vec![None; n_states];
    for (s, a) in pairs {
        label[s].get_or_insert(a);
    }
    label.iter().enumerate().filter_map(|(s, a)| a.map(|a| (s, a))).collect()
}

fn score(
    scenario: &Scenario,
    policy: Result<DeterministicPolicy>,
    held_out: &[(usize, usize)],
) -> Result<Outcome> {
    let n = scenario.expert.n_states();
    match policy {
        Ok(pi) => Ok(Outcome {
            criterion: held_out.iter().filter(|&&(s, a)| pi.actions[s] != a).count(),
            full: state_error_count(&pi, scenario.expert, None),
            feasible: true,
        }),
        Err(e) if is_soft_failure(&e) => Ok(Outcome { criterion: held_out.len(), full: n, feasible: false }),
        Err(e) => Err(e),
    }
}

fn check_inputs(grid: &CandidateGrid, config: &SelectionConfig, n_pairs: usize) -> Result<()> {
    if n_pairs == 0 {
        return Err(Error::invalid("no demonstrations"));
    }
    match (config.learner, grid.is_discount()) {
        (LearnerKind::Lp, true) | (LearnerKind::MaxEnt, false) => Ok(()),
        _ => Err(Error::invalid("LP selects discounts and MaxEnt selects horizons")),
    }
}

fn horizon_of(c: Candidate) -> usize {
    match c {
        Candidate::Horizon(t) => t,
        Candidate::Discount(_) => unreachable!("checked by check_inputs"),
    }
}

fn discount_of(c: Candidate) -> f64 {
    match c {
        Candidate::Discount(g) => g,
        Candidate::Horizon(_) => unreachable!("checked by check_inputs"),
    }
}

/// Expert trajectories for a horizon, drawn with `N = demos.len()` pairs.
pub fn trajectories_for(scenario: &Scenario, n_pairs: usize, horizon: usize, seed: u64) -> Result<TrajectorySet> {
    sample_trajectories(scenario.dynamics, scenario.expert, n_pairs, horizon, trajectory_seed(seed, horizon))
}

/// Split the data 80/20 (pairs for LP, per-horizon trajectories for
/// MaxEnt), train each candidate on the training part and count held-out
/// states whose demonstrated action the induced policy misses. The
/// candidate with the fewest errors wins; ties go to the smallest.
pub fn cross_validate(
    scenario: &Scenario,
    demos: &DemonstrationSet,
    grid: &CandidateGrid,
    config: &SelectionConfig,
    seed: u64,
) -> Result<SelectionResult> {
    check_inputs(grid, config, demos.len())?;
    let n = scenario.expert.n_states();
    let outcomes: Vec<Result<Outcome>> = match config.learner {
        LearnerKind::Lp => {
            let (train, val) = split_train_validation(demos, config.train_fraction, split_seed(seed))?;
            let held_out = labelled_states(val.pairs.iter().copied(), n);
            grid.candidates()
                .par_iter()
                .map(|&c| score(scenario, lp_induced_policy(scenario, &train, discount_of(c), &config.lp), &held_out))
                .collect()
        }
        LearnerKind::MaxEnt => grid
            .candidates()
            .par_iter()
            .map(|&c| {
                let trajs = trajectories_for(scenario, demos.len(), horizon_of(c), seed)?;
                if trajs.is_empty() {
                    return Ok(Outcome { criterion: 0, full: n, feasible: false });
                }
                let (train, val) = split_trajectories(&trajs, config.train_fraction, split_seed(seed))?;
                let held_out = labelled_states(val.trajectories.iter().flatten().copied(), n);
                let policy = if train.is_empty() {
                    Err(Error::invalid("no training trajectories"))
                } else {
                    maxent_induced_policy(scenario, &train, &config.maxent, training_seed(seed))
                };
                score(scenario, policy, &held_out)
            })
            .collect(),
    };
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SelectionResult::from_outcomes(grid.candidates().to_vec(), outcomes))
}

/// Train every candidate on all the data and score it on every state
/// against the true expert.
pub fn oracle_select(
    scenario: &Scenario,
    demos: &DemonstrationSet,
    grid: &CandidateGrid,
    config: &SelectionConfig,
    seed: u64,
) -> Result<SelectionResult> {
    check_inputs(grid, config, demos.len())?;
    let everything: Vec<(usize, usize)> = scenario.expert.actions.iter().copied().enumerate().collect();
    let outcomes: Vec<Result<Outcome>> = grid
        .candidates()
        .par_iter()
        .map(|&c| {
            let policy = match config.learner {
                LearnerKind::Lp => lp_induced_policy(scenario, demos, discount_of(c), &config.lp),
                LearnerKind::MaxEnt => {
                    let trajs = trajectories_for(scenario, demos.len(), horizon_of(c), seed)?;
                    if trajs.is_empty() {
                        Err(Error::invalid("horizon longer than the data"))
                    } else {
                        maxent_induced_policy(scenario, &trajs, &config.maxent, training_seed(seed))
                    }
                }
            };
            score(scenario, policy, &everything)
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SelectionResult::from_outcomes(grid.candidates().to_vec(), outcomes))
}

//! Maximum-entropy IRL over a finite, undiscounted horizon.
//!
//! The reward is linear in state features, `r = Φθ`. A backward soft
//! (log-sum-exp) recursion over the horizon gives a time-indexed stochastic
//! policy, a forward pass gives the expected state visitation frequencies,
//! and the log-likelihood gradient is the gap between the expert's feature
//! counts and the model's.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::demos::TrajectorySet;
use crate::env::FeatureMatrix;
use crate::error::{Error, Result};
use crate::mdp::{Dynamics, RewardTable};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct RewardWeights {
    pub theta: DVector<f64>,
}

impl RewardWeights {
    pub fn state_reward(&self, features: &FeatureMatrix) -> DVector<f64> {
        &features.features * &self.theta
    }

    /// `Φθ` broadcast over actions.
    pub fn reward_table(&self, features: &FeatureMatrix, n_actions: usize) -> RewardTable {
        let r = self.state_reward(features);
        DMatrix::from_fn(r.len(), n_actions, |s, _| r[s])
    }
}

/// `π_t(a|s)` for `t = 0..horizon`, each an `|S|×|A|` table.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftPolicy {
    pub per_step: Vec<DMatrix<f64>>,
    /// Soft value of each state at the first step.
    pub initial_value: DVector<f64>,
}

impl SoftPolicy {
    pub fn horizon(&self) -> usize {
        self.per_step.len()
    }
}

/// Expected state visitation: `per_step` is `horizon × |S|` and `d` its
/// column sums.
#[derive(Clone, Debug, PartialEq)]
pub struct VisitationTable {
    pub per_step: DMatrix<f64>,
    pub d: DVector<f64>,
}

fn check_features(dynamics: &Dynamics, features: &FeatureMatrix, theta: Option<&RewardWeights>) -> Result<()> {
    if features.n_states() != dynamics.n_states() {
        return Err(Error::dims("feature matrix rows differ from |S|"));
    }
    if let Some(w) = theta {
        if w.theta.len() != features.d() {
            return Err(Error::dims("θ length differs from the feature dimension"));
        }
    }
    Ok(())
}

/// Mean over trajectories of `Σ_t φ(s_t)`.
pub fn feature_expectations(trajs: &TrajectorySet, features: &FeatureMatrix) -> Result<DVector<f64>> {
    if trajs.is_empty() {
        return Err(Error::invalid("no trajectories"));
    }
    let mut f = DVector::zeros(features.d());
    for traj in &trajs.trajectories {
        for &(s, _) in traj {
            if s >= features.n_states() {
                return Err(Error::dims(format!("state {s} outside the feature matrix")));
            }
            f += features.features.row(s).transpose();
        }
    }
    Ok(f / trajs.len() as f64)
}

/// Backward soft recursion with `V_horizon = 0`:
/// `Q_t(s,a) = r(s) + Σ_s' P(s'|s,a) V_{t+1}(s')`, `V_t = log Σ_a exp Q_t`,
/// `π_t = exp(Q_t − V_t)`.
pub fn soft_backward(
    dynamics: &Dynamics,
    theta: &RewardWeights,
    features: &FeatureMatrix,
    horizon: usize,
) -> Result<SoftPolicy> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    check_features(dynamics, features, Some(theta))?;
    let r = theta.state_reward(features);
    let (n, m) = (dynamics.n_states(), dynamics.n_actions());
    let mut v = DVector::zeros(n);
    let mut per_step = vec![DMatrix::zeros(0, 0); horizon];
    for t in (0..horizon).rev() {
        let mut q = dynamics.expected_next(&v);
        for s in 0..n {
            let mut row = q.row_mut(s);
            row.add_scalar_mut(r[s]);
            let top = row.max();
            let log_z = top + row.iter().map(|x| (x - top).exp()).sum::<f64>().ln();
            v[s] = log_z;
            row.apply(|x| *x = (*x - log_z).exp());
            // renormalise away the last bit of rounding
            let total = row.sum();
            row /= total;
        }
        debug_assert_eq!(q.ncols(), m);
        per_step[t] = q;
    }
    Ok(SoftPolicy { per_step, initial_value: v })
}

/// Forward pass: `per_step[0] = ρ0`,
/// `per_step[t+1](s') = Σ_{s,a} per_step[t](s) π_t(a|s) P(s'|s,a)`.
pub fn expected_svf(dynamics: &Dynamics, policy: &SoftPolicy, rho0: &DVector<f64>) -> Result<VisitationTable> {
    let n = dynamics.n_states();
    if rho0.len() != n {
        return Err(Error::dims("ρ0 length differs from |S|"));
    }
    if rho0.iter().any(|&p| p < 0.0) || (rho0.sum() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("ρ0 must be a probability distribution"));
    }
    let horizon = policy.horizon();
    let mut per_step = DMatrix::zeros(horizon, n);
    let mut current = rho0.clone();
    for t in 0..horizon {
        per_step.set_row(t, &current.transpose());
        if t + 1 == horizon {
            break;
        }
        let pi = &policy.per_step[t];
        let mut next = DVector::zeros(n);
        for a in 0..dynamics.n_actions() {
            let weight = current.component_mul(&pi.column(a));
            next += dynamics.action_matrix(a).tr_mul(&weight);
        }
        current = next;
    }
    let d = per_step.row_sum().transpose();
    Ok(VisitationTable { per_step, d })
}

/// `f̃ − Φᵀ d`.
pub fn maxent_gradient(f_expert: &DVector<f64>, svf: &VisitationTable, features: &FeatureMatrix) -> Result<DVector<f64>> {
    if f_expert.len() != features.d() || svf.d.len() != features.n_states() {
        return Err(Error::dims("gradient inputs disagree on dimensions"));
    }
    Ok(f_expert - features.features.tr_mul(&svf.d))
}

/// Mean log-probability of the demonstrated actions under the soft policy,
/// `mean_τ Σ_t log π_t(a_t|s_t)`.
pub fn action_log_likelihood(policy: &SoftPolicy, trajs: &TrajectorySet) -> Result<f64> {
    if trajs.is_empty() {
        return Err(Error::invalid("no trajectories"));
    }
    if trajs.horizon != policy.horizon() {
        return Err(Error::dims("trajectory length differs from the policy horizon"));
    }
    let total: f64 = trajs
        .trajectories
        .iter()
        .map(|traj| traj.iter().enumerate().map(|(t, &(s, a))| policy.per_step[t][(s, a)].ln()).sum::<f64>())
        .sum();
    Ok(total / trajs.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub restarts: usize,
}

impl Default for MaxEntConfig {
    fn default() -> Self {
        MaxEntConfig { epochs: 200, learning_rate: 0.05, restarts: 5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntFit {
    pub weights: RewardWeights,
    pub reward: RewardTable,
    /// `‖∇‖₁` at the returned weights.
    pub gradient_l1: f64,
    /// Index of the winning restart.
    pub restart: usize,
}

/// Gradient of the objective at `theta` with start distribution `rho0`.
fn gradient_at(
    dynamics: &Dynamics,
    features: &FeatureMatrix,
    f_expert: &DVector<f64>,
    rho0: &DVector<f64>,
    theta: &RewardWeights,
    horizon: usize,
) -> Result<DVector<f64>> {
    let policy = soft_backward(dynamics, theta, features, horizon)?;
    let svf = expected_svf(dynamics, &policy, rho0)?;
    maxent_gradient(f_expert, &svf, features)
}

/// Gradient ascent from `restarts` seeded random initial weights
/// (uniform on `(−0.5, 0.5)`), keeping the run whose final gradient has
/// the smallest L1 norm (earliest restart on ties). The start distribution
/// is the empirical distribution of the trajectories' first states.
pub fn train_maxent(
    dynamics: &Dynamics,
    features: &FeatureMatrix,
    trajs: &TrajectorySet,
    config: &MaxEntConfig,
    seed: u64,
) -> Result<MaxEntFit> {
    if config.epochs == 0 || config.restarts == 0 {
        return Err(Error::invalid("epochs and restarts must be at least 1"));
    }
    check_features(dynamics, features, None)?;
    let f_expert = feature_expectations(trajs, features)?;
    let rho0 = DVector::from_vec(trajs.start_distribution(dynamics.n_states()));
    let horizon = trajs.horizon;
    let mut best: Option<MaxEntFit> = None;
    for restart in 0..config.restarts {
        let mut rng = seed::rng(seed::derive(seed, restart as u64));
        let mut theta =
            RewardWeights { theta: DVector::from_fn(features.d(), |_, _| rng.gen_range(-0.5..0.5)) };
        for _ in 0..config.epochs {
            let grad = gradient_at(dynamics, features, &f_expert, &rho0, &theta, horizon)?;
            theta.theta += grad * config.learning_rate;
        }
        let grad = gradient_at(dynamics, features, &f_expert, &rho0, &theta, horizon)?;
        let gradient_l1 = grad.lp_norm(1);
        if best.as_ref().is_none_or(|b| gradient_l1 < b.gradient_l1) {
            let reward = theta.reward_table(features, dynamics.n_actions());
            best = Some(MaxEntFit { weights: theta, reward, gradient_l1, restart });
        }
    }
    Ok(best.expect("at least one restart"))
}

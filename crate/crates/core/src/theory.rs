//! Numerical checks of the feasible-reward characterisation, the reward and
//! value error bounds, and the growth of the optimal-policy class with the
//! discount factor.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::demos::EstimatedPolicyMatrix;
use crate::error::{Error, Result};
use crate::io::fmt_real;
use crate::mdp::{advantage, closed_form_evaluation, policy_iteration, DeterministicPolicy, Dynamics, RewardTable};
use crate::seed;

/// Tolerance on advantages when certifying optimality.
pub const OPTIMALITY_TOL: f64 = 1e-8;

/// Largest `|A|^|S|` that exhaustive policy enumeration accepts.
pub const ENUMERATION_LIMIT: f64 = 1e6;

fn check_open_unit(gamma: f64, name: &str) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 1), got {gamma}")))
    }
}

fn check_table(dynamics: &Dynamics, table: &DMatrix<f64>, what: &str) -> Result<()> {
    if table.shape() != (dynamics.n_states(), dynamics.n_actions()) {
        return Err(Error::dims(format!("{what} must be |S|×|A|")));
    }
    Ok(())
}

/// Split `table` by the support of the policy matrix `pi`: entries where
/// `pi(a|s) > 0` and the rest. The two parts sum to `table`.
pub fn expert_filters(pi: &DMatrix<f64>, table: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if pi.shape() != table.shape() {
        return Err(Error::dims("policy matrix and table differ in shape"));
    }
    let filtered = table.zip_map(pi, |x, p| if p > 0.0 { x } else { 0.0 });
    let complement = table.zip_map(pi, |x, p| if p > 0.0 { 0.0 } else { x });
    Ok((filtered, complement))
}

/// `(E V)(s, a) = V(s)`.
fn broadcast(v: &DVector<f64>, n_actions: usize) -> DMatrix<f64> {
    DMatrix::from_fn(v.len(), n_actions, |s, _| v[s])
}

/// A reward for which `expert` is optimal, built from a nonnegative slack
/// table `zeta` and a value vector `v`: `R = −Ā ζ + (E − γP) V`, where `Ā`
/// keeps the non-expert entries.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleRewardWitness {
    pub zeta: DMatrix<f64>,
    pub v: DVector<f64>,
    pub gamma: f64,
    pub reward: RewardTable,
}

/// Assemble the reward from `(zeta, v)`.
pub fn feasible_reward(
    dynamics: &Dynamics,
    expert: &DeterministicPolicy,
    zeta: &DMatrix<f64>,
    v: &DVector<f64>,
    gamma: f64,
) -> Result<RewardTable> {
    check_table(dynamics, zeta, "zeta")?;
    if v.len() != dynamics.n_states() || expert.n_states() != dynamics.n_states() {
        return Err(Error::dims("value vector and policy must have |S| entries"));
    }
    let (_, off_expert) = expert_filters(&expert.matrix(dynamics.n_actions()), zeta)?;
    Ok(broadcast(v, dynamics.n_actions()) - dynamics.expected_next(v) * gamma - off_expert)
}

pub fn construct_feasible_reward(
    dynamics: &Dynamics,
    expert: &DeterministicPolicy,
    zeta: DMatrix<f64>,
    v: DVector<f64>,
    gamma: f64,
) -> Result<FeasibleRewardWitness> {
    check_open_unit(gamma, "gamma")?;
    if zeta.iter().any(|&z| !(z >= 0.0)) {
        return Err(Error::invalid("zeta must be nonnegative"));
    }
    let reward = feasible_reward(dynamics, expert, &zeta, &v, gamma)?;
    Ok(FeasibleRewardWitness { zeta, v, gamma, reward })
}

/// The witness of a reward under which `expert` is already optimal:
/// `V = V^π`, `ζ = E V − Q^π`.
pub fn witness_for(
    dynamics: &Dynamics,
    reward: &RewardTable,
    expert: &DeterministicPolicy,
    gamma: f64,
) -> Result<FeasibleRewardWitness> {
    check_open_unit(gamma, "gamma")?;
    let v = closed_form_evaluation(dynamics, reward, expert, gamma)?.0;
    let adv = advantage(dynamics, reward, expert, gamma)?.0;
    if adv.max() > OPTIMALITY_TOL {
        return Err(Error::invalid("the policy is not optimal for this reward"));
    }
    let zeta = adv.map(|a| (-a).max(0.0));
    Ok(FeasibleRewardWitness { zeta, v, gamma, reward: reward.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalityCheck {
    pub holds: bool,
    /// Largest advantage of a non-expert action (≤ 0 when optimal).
    pub max_violation: f64,
}

/// Whether no action beats the expert's by more than [`OPTIMALITY_TOL`].
pub fn verify_expert_optimal(
    dynamics: &Dynamics,
    reward: &RewardTable,
    expert: &DeterministicPolicy,
    gamma: f64,
) -> Result<OptimalityCheck> {
    let adv = advantage(dynamics, reward, expert, gamma)?.0;
    let mut max_violation = f64::NEG_INFINITY;
    for s in 0..dynamics.n_states() {
        for a in (0..dynamics.n_actions()).filter(|&a| a != expert.actions[s]) {
            max_violation = max_violation.max(adv[(s, a)]);
        }
    }
    if dynamics.n_actions() == 1 {
        max_violation = 0.0;
    }
    Ok(OptimalityCheck { holds: max_violation <= OPTIMALITY_TOL, max_violation })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewardErrorCheck {
    /// Reward rebuilt for the estimated policy.
    pub r_hat: RewardTable,
    /// Entrywise bound `A_π̂ Ā_E ζ`.
    pub bound: DMatrix<f64>,
    pub holds: bool,
    /// Largest `|R0 − R̂| − bound` (≤ 0 when the bound holds).
    pub max_excess: f64,
    /// `‖ζ‖∞ ≤ ‖R0‖∞ / (1 − γ)`.
    pub zeta_within_bound: bool,
}

/// Rebuild a reward for the estimated policy from the true witness with
/// `ζ̂ = Ā_E ζ` and the same `V` and discount, then compare it with `R0`
/// entrywise against the filtered slack.
pub fn reward_error_check(
    dynamics: &Dynamics,
    expert: &DeterministicPolicy,
    est: &EstimatedPolicyMatrix,
    r0: &FeasibleRewardWitness,
) -> Result<RewardErrorCheck> {
    if est.n_states() != dynamics.n_states() || est.n_actions != dynamics.n_actions() {
        return Err(Error::dims("estimated policy does not match the MDP"));
    }
    let recomputed = feasible_reward(dynamics, expert, &r0.zeta, &r0.v, r0.gamma)?;
    if (&recomputed - &r0.reward).amax() > 1e-9 * (1.0 + r0.reward.amax()) {
        return Err(Error::invalid("witness does not reproduce its reward"));
    }
    let m = dynamics.n_actions();
    let (_, zeta_hat) = expert_filters(&expert.matrix(m), &r0.zeta)?;
    let est_matrix = est.matrix();
    let (bound, off_est) = expert_filters(&est_matrix, &zeta_hat)?;
    let r_hat = broadcast(&r0.v, m) - dynamics.expected_next(&r0.v) * r0.gamma - off_est;
    let gap = (&r0.reward - &r_hat).abs() - &bound;
    let max_excess = gap.max();
    let r_norm = r0.reward.amax();
    Ok(RewardErrorCheck {
        r_hat,
        bound,
        holds: max_excess <= 1e-9 * (1.0 + r_norm),
        max_excess,
        zeta_within_bound: r0.zeta.amax() <= r_norm / (1.0 - r0.gamma) * (1.0 + 1e-12) + 1e-12,
    })
}

/// `R'(s,a) = R(s,a) + γ Σ P(s'|s,a) φ(s') − φ(s)`.
pub fn shape_reward(dynamics: &Dynamics, reward: &RewardTable, potential: &DVector<f64>, gamma: f64) -> Result<RewardTable> {
    check_table(dynamics, reward, "reward")?;
    if potential.len() != dynamics.n_states() {
        return Err(Error::dims("potential must have |S| entries"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid("gamma must lie in [0, 1)"));
    }
    Ok(reward + dynamics.expected_next(potential) * gamma - broadcast(potential, dynamics.n_actions()))
}

/// Index of the strict maximum of each row, or `None` if any row ties.
fn strict_argmax(reward: &RewardTable) -> Option<Vec<usize>> {
    (0..reward.nrows())
        .map(|s| {
            let row = reward.row(s);
            let best = row.transpose().imax();
            let unique = row.iter().enumerate().all(|(a, &x)| a == best || x < row[best]);
            unique.then_some(best)
        })
        .collect()
}

/// Move a reward optimal for `pi` at `gamma` to one for which `pi` is
/// optimal at `gamma_prime > gamma`, keeping every state's best action:
/// `R̂(s,a) = R(s,a) − c V(s)` with `c = (γ′ − γ)/γ` and
/// `V = (I − γ′P^π + cI)^{-1} R^π`.
pub fn gamma_lift_certificate(
    dynamics: &Dynamics,
    reward: &RewardTable,
    pi: &DeterministicPolicy,
    gamma: f64,
    gamma_prime: f64,
) -> Result<RewardTable> {
    check_table(dynamics, reward, "reward")?;
    check_open_unit(gamma, "gamma")?;
    check_open_unit(gamma_prime, "gamma_prime")?;
    if gamma_prime <= gamma {
        return Err(Error::invalid("gamma_prime must exceed gamma"));
    }
    if strict_argmax(reward).is_none() {
        return Err(Error::invalid("reward needs a strict best action in every state"));
    }
    if !verify_expert_optimal(dynamics, reward, pi, gamma)?.holds {
        return Err(Error::invalid("pi is not optimal for the reward at gamma"));
    }
    let n = dynamics.n_states();
    let c = (gamma_prime - gamma) / gamma;
    let r_pi = DVector::from_fn(n, |s, _| reward[(s, pi.actions[s])]);
    let system = DMatrix::identity(n, n) * (1.0 + c) - dynamics.policy_matrix(pi) * gamma_prime;
    let v = system.lu().solve(&r_pi).ok_or_else(|| Error::Singular("lifted evaluation system".into()))?;
    Ok(reward - broadcast(&v, dynamics.n_actions()) * c)
}

fn check_enumerable(n_states: usize, n_actions: usize) -> Result<()> {
    if (n_actions as f64).powi(n_states as i32) > ENUMERATION_LIMIT {
        return Err(Error::invalid(format!("|A|^|S| = {n_actions}^{n_states} exceeds the enumeration limit")));
    }
    Ok(())
}

/// Every deterministic policy, in lexicographic order of action vectors.
pub fn all_policies(n_states: usize, n_actions: usize) -> Result<Vec<DeterministicPolicy>> {
    check_enumerable(n_states, n_actions)?;
    let total = n_actions.pow(n_states as u32);
    Ok((0..total)
        .map(|mut code| {
            let mut actions = vec![0; n_states];
            for s in (0..n_states).rev() {
                actions[s] = code % n_actions;
                code /= n_actions;
            }
            DeterministicPolicy { actions }
        })
        .collect())
}

/// Every deterministic policy that is optimal for `(reward, gamma)`.
/// `gamma = 0` is allowed and means the one-step greedy problem.
pub fn optimal_policies(dynamics: &Dynamics, reward: &RewardTable, gamma: f64) -> Result<Vec<DeterministicPolicy>> {
    check_table(dynamics, reward, "reward")?;
    let mut out = Vec::new();
    for pi in all_policies(dynamics.n_states(), dynamics.n_actions())? {
        if verify_expert_optimal(dynamics, reward, &pi, gamma)?.holds {
            out.push(pi);
        }
    }
    Ok(out)
}

/// Draw a reward with i.i.d. uniform(0, 1) entries, redrawing until every
/// state has a strict best action.
pub fn sample_separable_reward<R: Rng>(n_states: usize, n_actions: usize, rng: &mut R) -> RewardTable {
    loop {
        let r = DMatrix::from_fn(n_states, n_actions, |_, _| rng.gen::<f64>());
        if strict_argmax(&r).is_some() {
            return r;
        }
    }
}

/// Optimal policies found by sampling rewards with a strict best action
/// per state. A lower bound on the full class.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyClassSample {
    pub gamma: f64,
    pub policies: Vec<DeterministicPolicy>,
    pub n_reward_samples: usize,
    pub seed: u64,
}

impl PolicyClassSample {
    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }
}

/// Sample `n_reward_samples` rewards, solve each at `gamma` and collect the
/// distinct optimal policies.
pub fn enumerate_policy_class(
    dynamics: &Dynamics,
    gamma: f64,
    n_reward_samples: usize,
    seed: u64,
) -> Result<PolicyClassSample> {
    if n_reward_samples == 0 {
        return Err(Error::invalid("need at least one reward sample"));
    }
    check_enumerable(dynamics.n_states(), dynamics.n_actions())?;
    let mut rng = seed::rng(seed);
    let mut found = BTreeSet::new();
    for _ in 0..n_reward_samples {
        let reward = sample_separable_reward(dynamics.n_states(), dynamics.n_actions(), &mut rng);
        let (pi, _) = policy_iteration(dynamics, &reward, gamma)?;
        found.insert(pi.actions);
    }
    Ok(PolicyClassSample {
        gamma,
        policies: found.into_iter().map(|actions| DeterministicPolicy { actions }).collect(),
        n_reward_samples,
        seed,
    })
}

/// The fully connected instance on which long horizons admit many optimal
/// policies: action 0 is a self-loop and is the best immediate action
/// everywhere; every other action moves uniformly to one of the other
/// states.
pub fn looping_dynamics(n_states: usize, n_actions: usize) -> Result<Dynamics> {
    if n_states < 2 || n_actions < 2 {
        return Err(Error::invalid("need at least 2 states and 2 actions"));
    }
    let off = 1.0 / (n_states - 1) as f64;
    Dynamics::from_fn(n_states, n_actions, |s, a, t| match (a, s == t) {
        (0, true) => 1.0,
        (0, false) => 0.0,
        (_, true) => 0.0,
        (_, false) => off,
    })
}

/// Reward for the looping instance with one dominant state `target`:
/// `R(target, 0) = 1`; elsewhere the self-loop earns `δ = 1/(2|S|+1)` and
/// other actions `δ/2`, so `R(target, 0) > 2|S| R(s, 0)` for `s ≠ target`.
pub fn dominant_state_reward(n_states: usize, n_actions: usize, target: usize) -> RewardTable {
    let delta = 1.0 / (2 * n_states + 1) as f64;
    DMatrix::from_fn(n_states, n_actions, |s, a| match (s == target, a) {
        (true, 0) => 1.0,
        (true, _) => delta / 2.0,
        (false, 0) => delta,
        (false, _) => delta / 2.0,
    })
}

/// Policies that stay at the dominant state and leave every other state,
/// certified optimal at `gamma` for that state's reward, over all choices
/// of dominant state. There are `(|A|−1)^{|S|−1}|S|` candidates.
pub fn looping_class(n_states: usize, n_actions: usize, gamma: f64) -> Result<Vec<DeterministicPolicy>> {
    let dynamics = looping_dynamics(n_states, n_actions)?;
    let mut found = BTreeSet::new();
    for target in 0..n_states {
        let reward = dominant_state_reward(n_states, n_actions, target);
        for pi in all_policies(n_states, n_actions)? {
            let shape_ok = pi.actions.iter().enumerate().all(|(s, &a)| (s == target) == (a == 0));
            if shape_ok && verify_expert_optimal(&dynamics, &reward, &pi, gamma)?.holds {
                found.insert(pi.actions);
            }
        }
    }
    Ok(found.into_iter().map(|actions| DeterministicPolicy { actions }).collect())
}

/// Inputs of the sample-size bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    pub gamma_hat: f64,
    pub gamma0: f64,
    pub r_max: f64,
    pub n_states: usize,
    pub class_size: usize,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub n: Option<usize>,
    pub gamma_hat: f64,
    pub gamma0: f64,
    pub term1: f64,
    pub term2: f64,
    pub rhs: f64,
    /// Measured value gap, when one was computed.
    pub lhs: Option<f64>,
    /// Deviation threshold for the policy estimation error.
    pub threshold: Option<f64>,
}

impl BoundReport {
    /// `lhs ≤ rhs` up to 1e-8, when a gap was measured.
    pub fn holds(&self) -> Option<bool> {
        self.lhs.map(|l| l <= self.rhs + 1e-8)
    }
}

/// Closed forms of the sample-size bound:
/// `term1 = 2R/(1−γ̂)² · sqrt(ln(|S||Π|/(2δ)) / (2N))`,
/// `term2 = (γ0−γ̂)R / ((1−γ0)(1−γ̂))`, and the threshold
/// `t = R/(1−γ̂) · sqrt(ln(|S||Π|/δ) / (2N))`.
pub fn sample_size_bound(inputs: &BoundInputs) -> Result<BoundReport> {
    let BoundInputs { n, gamma_hat, gamma0, r_max, n_states, class_size, delta } = *inputs;
    if !(gamma_hat > 0.0 && gamma_hat <= gamma0 && gamma0 < 1.0) {
        return Err(Error::invalid("need 0 < γ̂ ≤ γ0 < 1"));
    }
    if n == 0 || n_states == 0 || class_size == 0 {
        return Err(Error::invalid("N, |S| and |Π| must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) || !(r_max > 0.0) {
        return Err(Error::invalid("need δ in (0, 1) and R_max > 0"));
    }
    let count = n_states as f64 * class_size as f64;
    let log_term = (count / (2.0 * delta)).ln();
    if log_term < 0.0 {
        return Err(Error::invalid("|S||Π|/(2δ) must be at least 1"));
    }
    let n_f = n as f64;
    let term1 = 2.0 * r_max / (1.0 - gamma_hat).powi(2) * (log_term / (2.0 * n_f)).sqrt();
    let term2 = (gamma0 - gamma_hat) * r_max / ((1.0 - gamma0) * (1.0 - gamma_hat));
    let threshold = r_max / (1.0 - gamma_hat) * ((count / delta).ln() / (2.0 * n_f)).sqrt();
    Ok(BoundReport {
        n: Some(n),
        gamma_hat,
        gamma0,
        term1,
        term2,
        rhs: term1 + term2,
        lhs: None,
        threshold: Some(threshold),
    })
}

fn sup_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

fn check_reward_range(reward: &RewardTable, r_max: f64) -> Result<()> {
    if reward.iter().any(|&r| !(r >= -1e-12 && r <= r_max + 1e-12)) {
        return Err(Error::invalid("rewards must lie in [0, R_max]"));
    }
    Ok(())
}

/// Compare the true-reward value loss of the policy optimal for
/// `(r_hat, gamma_hat)` with `2/(1−γ̂) ‖R0 − R̂‖∞ + |γ0−γ̂| R/((1−γ0)(1−γ̂))`.
pub fn value_loss_check(
    dynamics: &Dynamics,
    r0: &RewardTable,
    gamma0: f64,
    r_hat: &RewardTable,
    gamma_hat: f64,
    r_max: f64,
) -> Result<BoundReport> {
    check_open_unit(gamma0, "gamma0")?;
    check_open_unit(gamma_hat, "gamma_hat")?;
    check_reward_range(r0, r_max)?;
    check_reward_range(r_hat, r_max)?;
    let (_, v_true) = policy_iteration(dynamics, r0, gamma0)?;
    let (pi_hat, _) = policy_iteration(dynamics, r_hat, gamma_hat)?;
    let v_hat = closed_form_evaluation(dynamics, r0, &pi_hat, gamma0)?;
    let lhs = sup_norm(&(v_true.0 - v_hat.0));
    let term1 = 2.0 / (1.0 - gamma_hat) * (r0 - r_hat).amax();
    let term2 = (gamma0 - gamma_hat).abs() * r_max / ((1.0 - gamma0) * (1.0 - gamma_hat));
    Ok(BoundReport { n: None, gamma_hat, gamma0, term1, term2, rhs: term1 + term2, lhs: Some(lhs), threshold: None })
}

/// `(lhs, rhs)` pairs of the three intermediate value inequalities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueGapChecks {
    /// `max_s (V^π_{γ̂} − V^π_{γ0})` against 0, for `π` optimal at `(R0, γ0)`.
    pub discount_lower: (f64, f64),
    /// `‖V^π_{γ0} − V^π_{γ̂}‖∞` against `(γ0−γ̂)R/((1−γ0)(1−γ̂))`.
    pub discount_upper: (f64, f64),
    /// Loss of the policy optimal for `R̂` against twice the largest
    /// reward-swap gap of the two optimal policies, all at `γ̂` under `R0`.
    pub policy_swap: (f64, f64),
    /// `max_π ‖V^π_{R0} − V^π_{R̂}‖∞` over the two policies against
    /// `‖R0 − R̂‖∞ / (1−γ̂)`.
    pub reward_gap: (f64, f64),
}

impl ValueGapChecks {
    pub fn all_hold(&self, tol: f64) -> bool {
        [self.discount_lower, self.discount_upper, self.policy_swap, self.reward_gap].iter().all(|(l, r)| *l <= r + tol)
    }
}

/// Evaluate the three inequalities that combine into the value bound.
/// Requires `γ̂ ≤ γ0` and rewards in `[0, R_max]`.
pub fn value_gap_checks(
    dynamics: &Dynamics,
    r0: &RewardTable,
    gamma0: f64,
    r_hat: &RewardTable,
    gamma_hat: f64,
    r_max: f64,
) -> Result<ValueGapChecks> {
    check_open_unit(gamma0, "gamma0")?;
    check_open_unit(gamma_hat, "gamma_hat")?;
    if gamma_hat > gamma0 {
        return Err(Error::invalid("need γ̂ ≤ γ0"));
    }
    check_reward_range(r0, r_max)?;
    check_reward_range(r_hat, r_max)?;
    let eval = |r: &RewardTable, pi: &DeterministicPolicy, g: f64| closed_form_evaluation(dynamics, r, pi, g).map(|v| v.0);

    let (pi_true, _) = policy_iteration(dynamics, r0, gamma0)?;
    let long = eval(r0, &pi_true, gamma0)?;
    let short = eval(r0, &pi_true, gamma_hat)?;
    let discount_lower = ((&short - &long).max(), 0.0);
    let discount_upper = (sup_norm(&(&long - &short)), (gamma0 - gamma_hat) * r_max / ((1.0 - gamma0) * (1.0 - gamma_hat)));

    let (pi_star, _) = policy_iteration(dynamics, r0, gamma_hat)?;
    let (pi_hat, _) = policy_iteration(dynamics, r_hat, gamma_hat)?;
    let loss = sup_norm(&(eval(r0, &pi_star, gamma_hat)? - eval(r0, &pi_hat, gamma_hat)?));
    let mut swap = 0.0f64;
    for pi in [&pi_star, &pi_hat] {
        swap = swap.max(sup_norm(&(eval(r0, pi, gamma_hat)? - eval(r_hat, pi, gamma_hat)?)));
    }
    let policy_swap = (loss, 2.0 * swap);
    let reward_gap = (swap, (r0 - r_hat).amax() / (1.0 - gamma_hat));
    Ok(ValueGapChecks { discount_lower, discount_upper, policy_swap, reward_gap })
}

/// `N,gamma_hat,gamma0,term1,term2,rhs,lhs,holds`; missing values are empty.
pub fn write_bound_csv(path: &Path, reports: &[BoundReport]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "N,gamma_hat,gamma0,term1,term2,rhs,lhs,holds")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n.map(|n| n.to_string()).unwrap_or_default(),
            fmt_real(r.gamma_hat),
            fmt_real(r.gamma0),
            fmt_real(r.term1),
            fmt_real(r.term2),
            fmt_real(r.rhs),
            r.lhs.map(fmt_real).unwrap_or_default(),
            r.holds().map(|h| h.to_string()).unwrap_or_default(),
        )?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{make_gridworld, GridSpec, GAMMA0};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_dynamics(n: usize, m: usize, seed: u64) -> Dynamics {
        let mut rng = seed::rng(seed);
        let raw: Vec<f64> = (0..n * m * n).map(|_| rng.gen_range(0.0..1.0)).collect();
        Dynamics::from_fn(n, m, |s, a, t| {
            let row = &raw[(s * m + a) * n..(s * m + a + 1) * n];
            row[t] / row.iter().sum::<f64>()
        })
        .unwrap()
    }

    fn random_policy(n: usize, m: usize, rng: &mut impl Rng) -> DeterministicPolicy {
        DeterministicPolicy { actions: (0..n).map(|_| rng.gen_range(0..m)).collect() }
    }

    #[test]
    fn filters_split_by_support() {
        let table = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let (f, c) = expert_filters(&DMatrix::zeros(2, 2), &table).unwrap();
        assert_eq!(f, DMatrix::zeros(2, 2));
        assert_eq!(c, table);
        let pi = DeterministicPolicy { actions: vec![1, 0] }.matrix(2);
        let (f, c) = expert_filters(&pi, &table).unwrap();
        assert_eq!(f, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 3.0, 0.0]));
        assert_eq!(&f + &c, table);
        assert!(expert_filters(&DMatrix::zeros(3, 2), &table).is_err());
    }

    proptest! {
        #[test]
        fn filters_sum_to_the_input(vals in prop::collection::vec(-5.0f64..5.0, 12), mask in prop::collection::vec(0u8..3, 12)) {
            let table = DMatrix::from_vec(4, 3, vals);
            let pi = DMatrix::from_iterator(4, 3, mask.iter().map(|&m| m as f64 / 2.0));
            let (f, c) = expert_filters(&pi, &table).unwrap();
            prop_assert_eq!(&f + &c, table);
        }

        #[test]
        fn sampled_bound_terms_are_monotone(g1 in 0.01f64..0.98, g2 in 0.01f64..0.98, n in 1usize..10_000) {
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            let at = |g: f64| sample_size_bound(&BoundInputs {
                n, gamma_hat: g, gamma0: 0.99, r_max: 1.0, n_states: 50, class_size: 4, delta: 0.1,
            }).unwrap();
            let (a, b) = (at(lo), at(hi));
            prop_assert!(a.term1 <= b.term1);
            prop_assert!(a.term2 >= b.term2);
        }
    }

    #[test]
    fn zero_witness_gives_zero_reward() {
        let d = random_dynamics(3, 2, 1);
        let pi = DeterministicPolicy { actions: vec![0, 1, 0] };
        let w = construct_feasible_reward(&d, &pi, DMatrix::zeros(3, 2), DVector::zeros(3), 0.5).unwrap();
        assert_eq!(w.reward, DMatrix::zeros(3, 2));
        assert!(verify_expert_optimal(&d, &w.reward, &pi, 0.5).unwrap().holds);
    }

    #[test]
    fn pure_shaping_witness_makes_every_advantage_zero() {
        let d = random_dynamics(4, 3, 2);
        let pi = DeterministicPolicy { actions: vec![2, 0, 1, 1] };
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let w = construct_feasible_reward(&d, &pi, DMatrix::zeros(4, 3), v, 0.7).unwrap();
        let adv = advantage(&d, &w.reward, &pi, 0.7).unwrap();
        assert!(adv.amax() < 1e-10);
    }

    #[test]
    fn unit_slack_makes_the_expert_strictly_optimal() {
        let d = random_dynamics(4, 3, 3);
        let pi = DeterministicPolicy { actions: vec![1, 1, 0, 2] };
        let zeta = DMatrix::from_fn(4, 3, |s, a| if a == pi.actions[s] { 0.0 } else { 1.0 });
        let w = construct_feasible_reward(&d, &pi, zeta, DVector::zeros(4), 0.9).unwrap();
        let adv = advantage(&d, &w.reward, &pi, 0.9).unwrap();
        for s in 0..4 {
            for a in 0..3 {
                if a != pi.actions[s] {
                    // the advantage equals −ζ exactly
                    assert!((adv[(s, a)] + 1.0).abs() < 1e-9);
                }
            }
        }
        assert!(construct_feasible_reward(&d, &pi, DMatrix::from_element(4, 3, -0.1), DVector::zeros(4), 0.9).is_err());
    }

    #[test]
    fn ground_truth_gridworld_expert_is_optimal() {
        let env = make_gridworld(&GridSpec { width: 5, height: 5, n_goals: 2, ..GridSpec::simple(4) }).unwrap();
        let check = verify_expert_optimal(env.mdp.dynamics(), env.mdp.rewards(), &env.expert, GAMMA0).unwrap();
        assert!(check.holds, "{}", check.max_violation);
    }

    #[test]
    fn adversarial_reward_is_rejected() {
        let d = random_dynamics(3, 2, 5);
        let pi = DeterministicPolicy { actions: vec![0, 0, 0] };
        let mut r = DMatrix::zeros(3, 2);
        r[(1, 1)] = 10.0;
        let check = verify_expert_optimal(&d, &r, &pi, 0.5).unwrap();
        assert!(!check.holds);
        assert!(check.max_violation > 1.0);
    }

    #[test]
    fn witness_round_trip() {
        let d = random_dynamics(4, 3, 6);
        let r = sample_separable_reward(4, 3, &mut seed::rng(1));
        let (pi, _) = policy_iteration(&d, &r, 0.8).unwrap();
        let w = witness_for(&d, &r, &pi, 0.8).unwrap();
        let rebuilt = feasible_reward(&d, &pi, &w.zeta, &w.v, 0.8).unwrap();
        assert!((rebuilt - &r).amax() < 1e-10);
    }

    fn canonical_witness(seed_value: u64) -> (Dynamics, DeterministicPolicy, FeasibleRewardWitness) {
        let d = random_dynamics(3, 3, seed_value);
        let r = sample_separable_reward(3, 3, &mut seed::rng(seed_value));
        let (pi, _) = policy_iteration(&d, &r, 0.9).unwrap();
        let w = witness_for(&d, &r, &pi, 0.9).unwrap();
        (d, pi, w)
    }

    #[test]
    fn exact_estimate_reproduces_the_reward() {
        let (d, pi, w) = canonical_witness(7);
        let est = EstimatedPolicyMatrix { chosen: pi.actions.iter().map(|&a| Some(a)).collect(), n_actions: 3 };
        let check = reward_error_check(&d, &pi, &est, &w).unwrap();
        assert!(check.holds && check.zeta_within_bound);
        assert!((&check.r_hat - &w.reward).amax() < 1e-12);
        assert_eq!(check.bound, DMatrix::zeros(3, 3));
    }

    #[test]
    fn empty_estimate_keeps_the_bound() {
        let (d, pi, w) = canonical_witness(8);
        let est = EstimatedPolicyMatrix { chosen: vec![None; 3], n_actions: 3 };
        let check = reward_error_check(&d, &pi, &est, &w).unwrap();
        assert!(check.holds);
        assert_eq!(check.bound, DMatrix::zeros(3, 3));
    }

    #[test]
    fn one_wrong_state_errs_only_at_the_wrong_pair() {
        let (d, pi, w) = canonical_witness(9);
        let wrong = (pi.actions[1] + 1) % 3;
        let mut chosen: Vec<Option<usize>> = pi.actions.iter().map(|&a| Some(a)).collect();
        chosen[1] = Some(wrong);
        let est = EstimatedPolicyMatrix { chosen, n_actions: 3 };
        let check = reward_error_check(&d, &pi, &est, &w).unwrap();
        assert!(check.holds);
        let err = (&w.reward - &check.r_hat).abs();
        for s in 0..3 {
            for a in 0..3 {
                if (s, a) != (1, wrong) {
                    assert!(err[(s, a)] < 1e-12);
                }
            }
        }
        assert!((err[(1, wrong)] - w.zeta[(1, wrong)]).abs() < 1e-12);
    }

    #[test]
    fn shaping_keeps_the_greedy_policy() {
        let d = random_dynamics(4, 3, 10);
        let r = sample_separable_reward(4, 3, &mut seed::rng(2));
        assert_eq!(shape_reward(&d, &r, &DVector::zeros(4), 0.6).unwrap(), r);
        let phi = DVector::from_vec(vec![3.0, -1.0, 0.2, 7.0]);
        let shaped = shape_reward(&d, &r, &phi, 0.6).unwrap();
        assert_eq!(policy_iteration(&d, &shaped, 0.6).unwrap().0, policy_iteration(&d, &r, 0.6).unwrap().0);

        let (pi, v) = policy_iteration(&d, &r, 0.6).unwrap();
        let by_value = shape_reward(&d, &r, &v.0, 0.6).unwrap();
        for s in 0..4 {
            assert!(by_value[(s, pi.actions[s])].abs() < 1e-10);
        }
    }

    #[test]
    fn lift_preserves_best_actions_and_optimality() {
        let d = random_dynamics(2, 2, 11);
        let mut rng = seed::rng(3);
        for _ in 0..20 {
            let r = sample_separable_reward(2, 2, &mut rng);
            let (pi, _) = policy_iteration(&d, &r, 0.3).unwrap();
            let lifted = gamma_lift_certificate(&d, &r, &pi, 0.3, 0.8).unwrap();
            assert!(verify_expert_optimal(&d, &lifted, &pi, 0.8).unwrap().holds);
            assert_eq!(strict_argmax(&lifted), strict_argmax(&r));
        }
        let r = sample_separable_reward(2, 2, &mut rng);
        let (pi, _) = policy_iteration(&d, &r, 0.3).unwrap();
        let near = gamma_lift_certificate(&d, &r, &pi, 0.3, 0.3 + 1e-9).unwrap();
        assert!((near - &r).amax() < 1e-7);
        assert!(gamma_lift_certificate(&d, &r, &pi, 0.0, 0.5).is_err());
    }

    #[test]
    fn myopic_class_has_one_policy_per_reward() {
        let d = random_dynamics(3, 3, 12);
        let mut rng = seed::rng(4);
        for _ in 0..10 {
            let r = sample_separable_reward(3, 3, &mut rng);
            assert_eq!(optimal_policies(&d, &r, 0.0).unwrap().len(), 1);
        }
        let sample = enumerate_policy_class(&d, 0.0, 30, 5).unwrap();
        assert!(!sample.is_empty() && sample.len() <= 27);
    }

    #[test]
    fn looping_instance_has_three_policies() {
        let class = looping_class(3, 2, 0.99).unwrap();
        assert_eq!(class.len(), 3);
        // the same policies are not all optimal when planning is myopic
        assert!(looping_class(3, 2, 0.01).unwrap().len() < 3);
    }

    #[test]
    fn enumeration_guard() {
        assert!(all_policies(7, 8).is_err());
        assert_eq!(all_policies(2, 3).unwrap().len(), 9);
    }

    #[test]
    fn pinned_bound_values() {
        // reference values from a 50-digit evaluation of the closed forms
        let r = sample_size_bound(&BoundInputs {
            n: 100,
            gamma_hat: 0.5,
            gamma0: 0.99,
            r_max: 1.0,
            n_states: 100,
            class_size: 1,
            delta: 0.05,
        })
        .unwrap();
        // 50-digit reference values, truncated
        let close = |x: f64, y: &str| ((x - y.parse::<f64>().unwrap()) / x).abs() < 1e-12;
        assert!(close(r.term1, "1.4867688755399353788"), "{}", r.term1);
        assert!(close(r.term2, "98"), "{}", r.term2);
        assert!(close(r.rhs, "99.486768875539935379"));
        assert!(close(r.threshold.unwrap(), "0.38989492070408104667"));
    }

    #[test]
    fn bound_edge_cases() {
        let base = BoundInputs { n: 100, gamma_hat: 0.9, gamma0: 0.9, r_max: 1.0, n_states: 100, class_size: 1, delta: 0.05 };
        assert_eq!(sample_size_bound(&base).unwrap().term2, 0.0);
        let big = sample_size_bound(&BoundInputs { n: 1_000_000_000_000, ..base }).unwrap();
        assert!(big.term1 < 1e-4 / (0.1f64 * 0.1));
        assert!(sample_size_bound(&BoundInputs { gamma_hat: 0.95, ..base }).is_err());
        assert!(sample_size_bound(&BoundInputs { delta: 1.5, ..base }).is_err());
    }

    #[test]
    fn value_bound_degenerate_cases() {
        let d = random_dynamics(4, 3, 13);
        let r = sample_separable_reward(4, 3, &mut seed::rng(6));
        let same = value_loss_check(&d, &r, 0.9, &r, 0.9, 1.0).unwrap();
        assert!(same.lhs.unwrap().abs() < 1e-9 && same.rhs == 0.0);
        let short = value_loss_check(&d, &r, 0.9, &r, 0.5, 1.0).unwrap();
        assert_eq!(short.term1, 0.0);
        assert!(short.holds().unwrap());
    }

    #[test]
    fn value_bound_on_random_instances() {
        let mut rng = seed::rng(14);
        for i in 0..50 {
            let d = random_dynamics(5, 3, 100 + i);
            let r0 = DMatrix::from_fn(5, 3, |_, _| rng.gen::<f64>());
            let r_hat = DMatrix::from_fn(5, 3, |_, _| rng.gen::<f64>());
            let a = rng.gen_range(0.05..0.95);
            let b = rng.gen_range(0.05..0.95);
            let (gh, g0) = if a <= b { (a, b) } else { (b, a) };
            let rep = value_loss_check(&d, &r0, g0, &r_hat, gh, 1.0).unwrap();
            assert!(rep.holds().unwrap());
            let gaps = value_gap_checks(&d, &r0, g0, &r_hat, gh, 1.0).unwrap();
            assert!(gaps.all_hold(1e-8), "{gaps:?}");
        }
    }

    #[test]
    fn bound_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.csv");
        let r = BoundReport { n: None, gamma_hat: 0.5, gamma0: 0.5, term1: 0.0, term2: 0.0, rhs: 0.0, lhs: Some(0.0), threshold: None };
        write_bound_csv(&path, &[r]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "N,gamma_hat,gamma0,term1,term2,rhs,lhs,holds\n,5.0000000000000000e-1,5.0000000000000000e-1,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,true\n"
        );
    }

    #[test]
    fn random_policies_do_not_break_filters() {
        let mut rng = seed::rng(15);
        let pi = random_policy(5, 4, &mut rng);
        let t = DMatrix::from_fn(5, 4, |_, _| rng.gen::<f64>());
        let (f, _) = expert_filters(&pi.matrix(4), &t).unwrap();
        for s in 0..5 {
            assert_eq!(f.row(s).iter().filter(|x| **x != 0.0).count(), 1);
        }
    }
}

//! Finite tabular MDPs and exact solvers.
//!
//! Transition probabilities are stored densely, one `|S|×|S|` matrix per
//! action. Reward tables are `|S|×|A|`. Every argmax in this module breaks
//! ties towards the lowest action index.

use nalgebra::{DMatrix, DVector};
use std::collections::VecDeque;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Row-sum tolerance for stochastic rows.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Default stop tolerance for value iteration.
pub const DEFAULT_VI_TOL: f64 = 1e-8;

/// Reward table of shape `|S|×|A|`.
pub type RewardTable = DMatrix<f64>;

/// Controlled Markov process `(S, A, P)` without a reward.
#[derive(Clone, Debug, PartialEq)]
pub struct Dynamics {
    n_states: usize,
    n_actions: usize,
    // per_action[a][(s, s')] = P(s' | s, a)
    per_action: Vec<DMatrix<f64>>,
}

impl Dynamics {
    /// Build from a row-major `[s][a][s']` tensor.
    pub fn from_row_major(n_states: usize, n_actions: usize, data: &[f64]) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidMdp("state and action counts must be positive".into()));
        }
        if data.len() != n_states * n_actions * n_states {
            return Err(Error::dims(format!(
                "transition tensor has {} entries, expected {}",
                data.len(),
                n_states * n_actions * n_states
            )));
        }
        let per_action = (0..n_actions)
            .map(|a| {
                DMatrix::from_fn(n_states, n_states, |s, t| {
                    data[(s * n_actions + a) * n_states + t]
                })
            })
            .collect();
        let d = Dynamics { n_states, n_actions, per_action };
        d.validate()?;
        Ok(d)
    }

    /// Build from one `|S|×|S|` matrix per action.
    pub fn from_action_matrices(per_action: Vec<DMatrix<f64>>) -> Result<Self> {
        let n_actions = per_action.len();
        if n_actions == 0 {
            return Err(Error::InvalidMdp("no actions".into()));
        }
        let n_states = per_action[0].nrows();
        for m in &per_action {
            if m.nrows() != n_states || m.ncols() != n_states {
                return Err(Error::dims("action matrices must all be |S|x|S|"));
            }
        }
        let d = Dynamics { n_states, n_actions, per_action };
        d.validate()?;
        Ok(d)
    }

    /// Build from a closure `p(s, a, s')`.
    pub fn from_fn(
        n_states: usize,
        n_actions: usize,
        p: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let per_action = (0..n_actions)
            .map(|a| DMatrix::from_fn(n_states, n_states, |s, t| p(s, a, t)))
            .collect();
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidMdp("state and action counts must be positive".into()));
        }
        let d = Dynamics { n_states, n_actions, per_action };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        for (a, m) in self.per_action.iter().enumerate() {
            for s in 0..self.n_states {
                let row = m.row(s);
                if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                    return Err(Error::InvalidMdp(format!(
                        "P(.|s={s}, a={a}) has a negative or non-finite entry"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::InvalidMdp(format!(
                        "P(.|s={s}, a={a}) sums to {sum}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.per_action[a][(s, next)]
    }

    /// `P_a`, the `|S|×|S|` transition matrix of action `a`.
    pub fn action_matrix(&self, a: usize) -> &DMatrix<f64> {
        &self.per_action[a]
    }

    /// `P(·|s, a)` as a row vector.
    pub fn row(&self, s: usize, a: usize) -> nalgebra::RowDVector<f64> {
        self.per_action[a].row(s).into_owned()
    }

    /// Row-major `[s][a][s']` copy of the tensor.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_states * self.n_actions * self.n_states);
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                out.extend(self.per_action[a].row(s).iter().copied());
            }
        }
        out
    }

    /// `P^π`, with row `s` equal to `P(·|s, π(s))`.
    pub fn policy_matrix(&self, pi: &DeterministicPolicy) -> DMatrix<f64> {
        let n = self.n_states;
        let mut m = DMatrix::zeros(n, n);
        for s in 0..n {
            m.row_mut(s).copy_from(&self.per_action[pi.actions[s]].row(s));
        }
        m
    }

    /// Table of `Σ_s' P(s'|s,a) v(s')`.
    pub fn expected_next(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_states, self.n_actions);
        for a in 0..self.n_actions {
            out.set_column(a, &(&self.per_action[a] * v));
        }
        out
    }

    fn check_reward(&self, reward: &RewardTable) -> Result<()> {
        if reward.nrows() != self.n_states || reward.ncols() != self.n_actions {
            return Err(Error::dims(format!(
                "reward table is {}x{}, MDP is {}x{}",
                reward.nrows(),
                reward.ncols(),
                self.n_states,
                self.n_actions
            )));
        }
        Ok(())
    }

    fn check_policy(&self, pi: &DeterministicPolicy) -> Result<()> {
        if pi.actions.len() != self.n_states {
            return Err(Error::dims("policy length differs from |S|"));
        }
        if pi.actions.iter().any(|&a| a >= self.n_actions) {
            return Err(Error::dims("policy action out of range"));
        }
        Ok(())
    }

    /// Every state reachable from every other state along the support of
    /// `P^π`.
    pub fn is_irreducible_under(&self, pi: &DeterministicPolicy) -> bool {
        let n = self.n_states;
        let pm = self.policy_matrix(pi);
        let pm = &pm;
        let adj: Vec<Vec<usize>> = (0..n).map(|s| (0..n).filter(|&t| pm[(s, t)] > 0.0).collect()).collect();
        let mut radj = vec![Vec::new(); n];
        for (s, succ) in adj.iter().enumerate() {
            for &t in succ {
                radj[t].push(s);
            }
        }
        reaches_all(&adj, 0) && reaches_all(&radj, 0)
    }
}

fn reaches_all(adj: &[Vec<usize>], start: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(s) = queue.pop_front() {
        for &t in &adj[s] {
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    seen.into_iter().all(|x| x)
}

/// A finite MDP with its ground-truth reward table in `[0, r_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp {
    dynamics: Dynamics,
    rewards: RewardTable,
    r_max: f64,
}

impl TabularMdp {
    pub fn new(dynamics: Dynamics, rewards: RewardTable, r_max: f64) -> Result<Self> {
        dynamics.check_reward(&rewards)?;
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidMdp(format!("r_max must be positive, got {r_max}")));
        }
        if rewards.iter().any(|&r| !(0.0..=r_max).contains(&r)) {
            return Err(Error::InvalidMdp(format!("rewards must lie in [0, {r_max}]")));
        }
        Ok(TabularMdp { dynamics, rewards, r_max })
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn rewards(&self) -> &RewardTable {
        &self.rewards
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_states(&self) -> usize {
        self.dynamics.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.dynamics.n_actions
    }

    pub fn value_iteration(&self, gamma: f64, tol: f64) -> Result<ValueTable> {
        value_iteration(&self.dynamics, &self.rewards, gamma, tol)
    }

    pub fn greedy_policy(&self, v: &ValueTable, gamma: f64) -> Result<DeterministicPolicy> {
        greedy_policy(&self.dynamics, &self.rewards, v, gamma)
    }

    pub fn closed_form_evaluation(&self, pi: &DeterministicPolicy, gamma: f64) -> Result<ValueTable> {
        closed_form_evaluation(&self.dynamics, &self.rewards, pi, gamma)
    }

    pub fn advantage(&self, pi: &DeterministicPolicy, gamma: f64) -> Result<QTable> {
        advantage(&self.dynamics, &self.rewards, pi, gamma)
    }

    pub fn finite_horizon_values(&self, horizon: usize) -> Result<ValueTable> {
        finite_horizon_values(&self.dynamics, &self.rewards, horizon)
    }

    /// Optimal policy under the ground-truth reward at `gamma`.
    pub fn optimal_policy(&self, gamma: f64) -> Result<DeterministicPolicy> {
        optimal_policy(&self.dynamics, &self.rewards, gamma)
    }
}

/// One action index per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicPolicy {
    pub actions: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn new(actions: Vec<usize>, n_actions: usize) -> Result<Self> {
        if let Some(&bad) = actions.iter().find(|&&a| a >= n_actions) {
            return Err(Error::invalid(format!("action {bad} out of range 0..{n_actions}")));
        }
        Ok(DeterministicPolicy { actions })
    }

    pub fn constant(n_states: usize, action: usize) -> Self {
        DeterministicPolicy { actions: vec![action; n_states] }
    }

    pub fn n_states(&self) -> usize {
        self.actions.len()
    }

    /// The `{0,1}^{|S|×|A|}` matrix form.
    pub fn matrix(&self, n_actions: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.actions.len(), n_actions);
        for (s, &a) in self.actions.iter().enumerate() {
            m[(s, a)] = 1.0;
        }
        m
    }
}

/// State values `V(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable(pub DVector<f64>);

impl Deref for ValueTable {
    type Target = DVector<f64>;
    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// State-action values, or advantages, of shape `|S|×|A|`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable(pub DMatrix<f64>);

impl Deref for QTable {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid(format!("discount must lie in [0, 1), got {gamma}")));
    }
    Ok(())
}

/// `Q(s,a) = R(s,a) + γ Σ_s' P(s'|s,a) v(s')`.
pub fn bellman_q(dynamics: &Dynamics, reward: &RewardTable, v: &DVector<f64>, gamma: f64) -> DMatrix<f64> {
    reward + dynamics.expected_next(v) * gamma
}

/// Row-wise argmax, lowest index on ties.
pub fn argmax_rows(q: &DMatrix<f64>) -> DeterministicPolicy {
    let actions = (0..q.nrows())
        .map(|s| {
            let mut best = 0;
            for a in 1..q.ncols() {
                if q[(s, a)] > q[(s, best)] {
                    best = a;
                }
            }
            best
        })
        .collect();
    DeterministicPolicy { actions }
}

fn row_max(q: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(
        q.nrows(),
        q.row_iter().map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    )
}

/// `‖V − max_a (R + γPV)‖_∞`.
pub fn bellman_residual(dynamics: &Dynamics, reward: &RewardTable, v: &DVector<f64>, gamma: f64) -> f64 {
    (row_max(&bellman_q(dynamics, reward, v, gamma)) - v).amax()
}

/// Value iteration with the sup-norm stop rule
/// `‖V_{k+1} − V_k‖_∞ ≤ tol·(1−γ)/(2γ)`.
pub fn value_iteration(dynamics: &Dynamics, reward: &RewardTable, gamma: f64, tol: f64) -> Result<ValueTable> {
    value_iteration_trace(dynamics, reward, gamma, tol).map(|(v, _)| v)
}

/// Value iteration that also returns the sup-norm change of every sweep.
pub fn value_iteration_trace(
    dynamics: &Dynamics,
    reward: &RewardTable,
    gamma: f64,
    tol: f64,
) -> Result<(ValueTable, Vec<f64>)> {
    dynamics.check_reward(reward)?;
    check_gamma(gamma)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if gamma == 0.0 {
        return Ok((ValueTable(row_max(reward)), Vec::new()));
    }
    let threshold = tol * (1.0 - gamma) / (2.0 * gamma);
    let mut v = DVector::zeros(dynamics.n_states);
    let mut deltas = Vec::new();
    loop {
        let next = row_max(&bellman_q(dynamics, reward, &v, gamma));
        let delta = (&next - &v).amax();
        deltas.push(delta);
        v = next;
        if delta <= threshold {
            return Ok((ValueTable(v), deltas));
        }
    }
}

pub fn greedy_policy(
    dynamics: &Dynamics,
    reward: &RewardTable,
    v: &ValueTable,
    gamma: f64,
) -> Result<DeterministicPolicy> {
    dynamics.check_reward(reward)?;
    if v.len() != dynamics.n_states {
        return Err(Error::dims("value table length differs from |S|"));
    }
    Ok(argmax_rows(&bellman_q(dynamics, reward, &v.0, gamma)))
}

/// `V^π = (I − γP^π)^{-1} R^π` by LU factorisation.
pub fn closed_form_evaluation(
    dynamics: &Dynamics,
    reward: &RewardTable,
    pi: &DeterministicPolicy,
    gamma: f64,
) -> Result<ValueTable> {
    dynamics.check_reward(reward)?;
    dynamics.check_policy(pi)?;
    check_gamma(gamma)?;
    let n = dynamics.n_states;
    let r_pi = DVector::from_iterator(n, (0..n).map(|s| reward[(s, pi.actions[s])]));
    let system = DMatrix::identity(n, n) - dynamics.policy_matrix(pi) * gamma;
    system
        .lu()
        .solve(&r_pi)
        .map(ValueTable)
        .ok_or_else(|| Error::Singular("I - γP^π".into()))
}

/// `A(s,a) = Q^π(s,a) − Q^π(s,π(s))`; zero on the policy's own actions.
pub fn advantage(
    dynamics: &Dynamics,
    reward: &RewardTable,
    pi: &DeterministicPolicy,
    gamma: f64,
) -> Result<QTable> {
    let v = closed_form_evaluation(dynamics, reward, pi, gamma)?;
    let q = bellman_q(dynamics, reward, &v.0, gamma);
    let mut adv = q.clone();
    for s in 0..dynamics.n_states {
        let base = q[(s, pi.actions[s])];
        for a in 0..dynamics.n_actions {
            adv[(s, a)] = if a == pi.actions[s] { 0.0 } else { q[(s, a)] - base };
        }
    }
    Ok(QTable(adv))
}

/// Undiscounted `T`-step optimal state values by backward induction.
pub fn finite_horizon_values(dynamics: &Dynamics, reward: &RewardTable, horizon: usize) -> Result<ValueTable> {
    Ok(ValueTable(row_max(&finite_horizon_q(dynamics, reward, horizon)?.0)))
}

/// First-step `Q_T(s,a) = R(s,a) + Σ_s' P(s'|s,a) V_{T−1}(s')`.
pub fn finite_horizon_q(dynamics: &Dynamics, reward: &RewardTable, horizon: usize) -> Result<QTable> {
    dynamics.check_reward(reward)?;
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let mut v = DVector::zeros(dynamics.n_states);
    let mut q = reward.clone();
    for _ in 0..horizon {
        q = bellman_q(dynamics, reward, &v, 1.0);
        v = row_max(&q);
    }
    Ok(QTable(q))
}

/// Greedy first action of the undiscounted `T`-step problem.
pub fn finite_horizon_policy(dynamics: &Dynamics, reward: &RewardTable, horizon: usize) -> Result<DeterministicPolicy> {
    Ok(argmax_rows(&finite_horizon_q(dynamics, reward, horizon)?.0))
}

/// Dense random dynamics: every row is an independent uniform draw,
/// normalised. Used for property checks and demos.
pub fn random_dynamics(n_states: usize, n_actions: usize, seed: u64) -> Result<Dynamics> {
    use rand::Rng;
    let mut rng = crate::seed::rng(seed);
    let raw: Vec<f64> = (0..n_states * n_actions * n_states).map(|_| rng.gen_range(0.0..1.0)).collect();
    Dynamics::from_fn(n_states, n_actions, |s, a, t| {
        let row = &raw[(s * n_actions + a) * n_states..(s * n_actions + a + 1) * n_states];
        row[t] / row.iter().sum::<f64>()
    })
}

/// Howard policy iteration. Exact up to LU round-off; switches action only
/// on a strict improvement so it terminates on ties.
pub fn policy_iteration(
    dynamics: &Dynamics,
    reward: &RewardTable,
    gamma: f64,
) -> Result<(DeterministicPolicy, ValueTable)> {
    dynamics.check_reward(reward)?;
    check_gamma(gamma)?;
    let mut pi = argmax_rows(reward);
    loop {
        let v = closed_form_evaluation(dynamics, reward, &pi, gamma)?;
        let q = bellman_q(dynamics, reward, &v.0, gamma);
        let mut changed = false;
        for s in 0..dynamics.n_states {
            let current = q[(s, pi.actions[s])];
            let scale = 1.0 + current.abs();
            let mut best = pi.actions[s];
            for a in 0..dynamics.n_actions {
                if q[(s, a)] > q[(s, best)] + 1e-12 * scale {
                    best = a;
                }
            }
            if best != pi.actions[s] {
                pi.actions[s] = best;
                changed = true;
            }
        }
        if !changed {
            return Ok((pi, v));
        }
    }
}

/// Optimal policy with the lowest-index tie-break, from value iteration at
/// a tight tolerance.
pub fn optimal_policy(dynamics: &Dynamics, reward: &RewardTable, gamma: f64) -> Result<DeterministicPolicy> {
    let v = value_iteration(dynamics, reward, gamma, 1e-10)?;
    greedy_policy(dynamics, reward, &v, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single_state(r: f64) -> TabularMdp {
        let d = Dynamics::from_row_major(1, 1, &[1.0]).unwrap();
        TabularMdp::new(d, DMatrix::from_element(1, 1, r), 1.0).unwrap()
    }

    /// Two states, two actions: action 0 stays, action 1 switches.
    fn two_state_chain() -> TabularMdp {
        let d = Dynamics::from_fn(2, 2, |s, a, t| match a {
            0 => (s == t) as u8 as f64,
            _ => (s != t) as u8 as f64,
        })
        .unwrap();
        let r = DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 1.0, 0.5]);
        TabularMdp::new(d, r, 1.0).unwrap()
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        let err = Dynamics::from_row_major(1, 1, &[0.9]).unwrap_err();
        assert!(matches!(err, Error::InvalidMdp(_)));
        let err = Dynamics::from_row_major(2, 1, &[1.5, -0.5, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidMdp(_)));
    }

    #[test]
    fn rejects_rewards_outside_range() {
        let d = Dynamics::from_row_major(1, 1, &[1.0]).unwrap();
        assert!(TabularMdp::new(d.clone(), DMatrix::from_element(1, 1, -0.1), 1.0).is_err());
        assert!(TabularMdp::new(d, DMatrix::from_element(1, 1, 1.1), 1.0).is_err());
    }

    #[test]
    fn value_iteration_geometric_series() {
        let v = single_state(1.0).value_iteration(0.5, 1e-10).unwrap();
        assert_abs_diff_eq!(v[0], 2.0, epsilon = 1e-9);
    }

    #[test]
    fn value_iteration_myopic() {
        let mdp = two_state_chain();
        let v = mdp.value_iteration(0.0, 1e-8).unwrap();
        assert_eq!(v.as_slice(), &[0.2, 1.0]);
    }

    #[test]
    fn value_iteration_matches_best_of_all_policies() {
        let mdp = two_state_chain();
        let gamma = 0.9;
        let v = mdp.value_iteration(gamma, 1e-10).unwrap();
        let mut best = [f64::NEG_INFINITY; 2];
        for a0 in 0..2 {
            for a1 in 0..2 {
                let pi = DeterministicPolicy::new(vec![a0, a1], 2).unwrap();
                let vp = mdp.closed_form_evaluation(&pi, gamma).unwrap();
                for s in 0..2 {
                    best[s] = best[s].max(vp[s]);
                }
            }
        }
        let greedy = mdp.greedy_policy(&v, gamma).unwrap();
        let vg = mdp.closed_form_evaluation(&greedy, gamma).unwrap();
        for s in 0..2 {
            assert_abs_diff_eq!(vg[s], best[s], epsilon = 1e-6);
            assert_abs_diff_eq!(v[s], best[s], epsilon = 1e-6);
        }
    }

    #[test]
    fn bellman_residual_meets_stop_rule() {
        let mdp = two_state_chain();
        let (gamma, tol) = (0.9, 1e-6);
        let v = mdp.value_iteration(gamma, tol).unwrap();
        let res = bellman_residual(mdp.dynamics(), mdp.rewards(), &v, gamma);
        assert!(res <= tol * (1.0 - gamma) / (2.0 * gamma) + 1e-15);
    }

    #[test]
    fn greedy_ties_pick_lowest_index() {
        let d = Dynamics::from_fn(2, 3, |s, _, t| (s == t) as u8 as f64).unwrap();
        let r = DMatrix::from_row_slice(2, 3, &[0.5, 0.5, 0.5, 0.1, 0.7, 0.7]);
        let mdp = TabularMdp::new(d, r, 1.0).unwrap();
        let v = mdp.value_iteration(0.0, 1e-8).unwrap();
        assert_eq!(mdp.greedy_policy(&v, 0.0).unwrap().actions, vec![0, 1]);
    }

    #[test]
    fn closed_form_trivial_cases() {
        let mdp = two_state_chain();
        let pi = DeterministicPolicy::new(vec![1, 0], 2).unwrap();
        let v = mdp.closed_form_evaluation(&pi, 0.0).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 1.0]);

        let v = single_state(0.5).closed_form_evaluation(&DeterministicPolicy::constant(1, 0), 0.8).unwrap();
        assert_abs_diff_eq!(v[0], 2.5, epsilon = 1e-12);
    }

    #[test]
    fn advantage_zero_on_policy_and_nonpositive_when_optimal() {
        let mdp = two_state_chain();
        let gamma = 0.9;
        let pi = mdp.optimal_policy(gamma).unwrap();
        let adv = mdp.advantage(&pi, gamma).unwrap();
        for s in 0..2 {
            assert_eq!(adv[(s, pi.actions[s])], 0.0);
            for a in 0..2 {
                assert!(adv[(s, a)] <= 1e-8);
            }
        }
        // Staying in state 0 forever forgoes state 1's reward.
        let bad = DeterministicPolicy::new(vec![0, 0], 2).unwrap();
        let adv = mdp.advantage(&bad, gamma).unwrap();
        assert!(adv[(0, 1)] > 0.0);
    }

    #[test]
    fn finite_horizon_small_cases() {
        let mdp = two_state_chain();
        let v1 = mdp.finite_horizon_values(1).unwrap();
        assert_eq!(v1.as_slice(), &[0.2, 1.0]);
        let v2 = single_state(1.0).finite_horizon_values(2).unwrap();
        assert_eq!(v2.as_slice(), &[2.0]);
        assert!(mdp.finite_horizon_values(0).is_err());
    }

    #[test]
    fn policy_iteration_agrees_with_value_iteration() {
        let mdp = two_state_chain();
        let (pi, v) = policy_iteration(mdp.dynamics(), mdp.rewards(), 0.9).unwrap();
        let vi = mdp.value_iteration(0.9, 1e-12).unwrap();
        assert_eq!(pi, mdp.optimal_policy(0.9).unwrap());
        assert!((&v.0 - &vi.0).amax() < 1e-9);
    }

    #[test]
    fn row_major_round_trip() {
        let mdp = two_state_chain();
        let flat = mdp.dynamics().to_row_major();
        let back = Dynamics::from_row_major(2, 2, &flat).unwrap();
        assert_eq!(&back, mdp.dynamics());
    }
}

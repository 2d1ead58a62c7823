//! Linear-programming IRL from partial demonstrations under an effective
//! discount.
//!
//! The learned reward is a state reward `R ∈ ℝ^|S|`. For each demonstrated
//! state `i` with estimated expert action `â_i` and each other action `a`,
//! the row vector
//!
//! ```text
//! F(i, a) = (P_E(i, ·) − P(i, a, ·)) (I − γ̂ P_E)⁻¹
//! ```
//!
//! gives the value advantage of `â_i` over `a` as `F(i, a)·R`, where `P_E`
//! holds the expert's transition rows for demonstrated states and zeros
//! elsewhere. The LP maximises `Σ_i min_a F(i, a)·R` with every advantage
//! at least a positive margin and `|R| ≤ r_max`.

use nalgebra::{DMatrix, DVector};

use super::simplex::{solve_lp, LpProblem, LpStatus};
use crate::demos::{estimate_policy, DemonstrationSet, EstimatedPolicyMatrix};
use crate::error::{Error, Result};
use crate::mdp::{Dynamics, RewardTable};

/// Smallest margin tried before giving up.
pub const MIN_MARGIN: f64 = 1e-6;

/// `P_E`: the expert's transition row at demonstrated states, zero rows
/// elsewhere.
pub fn estimate_expert_transitions(dynamics: &Dynamics, est: &EstimatedPolicyMatrix) -> Result<DMatrix<f64>> {
    let n = dynamics.n_states();
    if est.n_states() != n || est.n_actions != dynamics.n_actions() {
        return Err(Error::dims("estimated policy does not match the dynamics"));
    }
    let mut pe = DMatrix::zeros(n, n);
    for (s, a) in est.chosen.iter().enumerate() {
        if let Some(a) = *a {
            pe.row_mut(s).copy_from(&dynamics.action_matrix(a).row(s));
        }
    }
    Ok(pe)
}

/// The rows `F(s, a)`, stored at row `s·|A| + a`. Rows for undemonstrated
/// states and for the expert's own action are zero.
///
/// An action whose transition row at `s` equals the expert's is
/// indistinguishable from it under any state reward (its row is exactly
/// zero), so it is left out of `constrained`.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingMatrix {
    pub rows: DMatrix<f64>,
    pub n_actions: usize,
    /// `(state, action)` pairs that receive margin constraints, sorted.
    pub constrained: Vec<(usize, usize)>,
}

impl MappingMatrix {
    pub fn row(&self, s: usize, a: usize) -> nalgebra::DMatrixView<'_, f64> {
        self.rows.rows(s * self.n_actions + a, 1)
    }
}

pub fn mapping_matrix(
    dynamics: &Dynamics,
    p_expert: &DMatrix<f64>,
    est: &EstimatedPolicyMatrix,
    gamma_hat: f64,
) -> Result<MappingMatrix> {
    if !(0.0..1.0).contains(&gamma_hat) {
        return Err(Error::invalid(format!("gamma_hat = {gamma_hat} must lie in [0, 1)")));
    }
    let n = dynamics.n_states();
    let m = dynamics.n_actions();
    if p_expert.shape() != (n, n) {
        return Err(Error::dims("P_E must be |S|×|S|"));
    }
    let system = DMatrix::identity(n, n) - p_expert * gamma_hat;
    let inverse = system
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("I − γ̂ P_E is not invertible".into()))?;
    let mut rows = DMatrix::zeros(n * m, n);
    let mut constrained = Vec::new();
    for a in 0..m {
        let diff = p_expert - dynamics.action_matrix(a);
        let block = &diff * &inverse;
        for (s, chosen) in est.chosen.iter().enumerate() {
            if matches!(chosen, Some(e) if *e != a) {
                rows.row_mut(s * m + a).copy_from(&block.row(s));
                if diff.row(s).amax() > 0.0 {
                    constrained.push((s, a));
                }
            }
        }
    }
    constrained.sort_unstable();
    Ok(MappingMatrix { rows, n_actions: m, constrained })
}

/// Assemble the LP over `x = (R, ξ)` with one `ξ_i` per demonstrated state
/// that has at least one constrained action (ascending state order). For
/// every constrained `(i, a)` there are two rows: `ξ_i − F(i, a)·R ≤ 0` and
/// `−F(i, a)·R ≤ −margin`.
pub fn build_lp(fmap: &MappingMatrix, est: &EstimatedPolicyMatrix, r_max: f64, margin: f64) -> Result<LpProblem> {
    if !(margin > 0.0) {
        return Err(Error::invalid("the margin must be strictly positive"));
    }
    if !(r_max > 0.0) {
        return Err(Error::invalid("r_max must be positive"));
    }
    let demonstrated = est.demonstrated_states();
    if demonstrated.is_empty() {
        return Err(Error::invalid("no demonstrated states"));
    }
    let n = est.n_states();
    let mut owners: Vec<usize> = fmap.constrained.iter().map(|&(s, _)| s).collect();
    owners.dedup();
    let k = owners.len();
    let n_rows = 2 * fmap.constrained.len();
    let mut d = DMatrix::zeros(n_rows, n + k);
    let mut b = DVector::zeros(n_rows);
    let mut xi = 0;
    for (pair, &(s, a)) in fmap.constrained.iter().enumerate() {
        if owners[xi] != s {
            xi += 1;
        }
        let r = 2 * pair;
        let f = fmap.row(s, a);
        for j in 0..n {
            d[(r, j)] = -f[j];
            d[(r + 1, j)] = -f[j];
        }
        d[(r, n + xi)] = 1.0;
        b[r + 1] = -margin;
    }
    let mut objective = DVector::zeros(n + k);
    objective.rows_mut(n, k).fill(1.0);
    let mut lower = vec![-r_max; n];
    lower.extend(std::iter::repeat_n(0.0, k));
    let mut upper = vec![r_max; n];
    upper.extend(std::iter::repeat_n(f64::INFINITY, k));
    Ok(LpProblem { objective, constraints: d, rhs: b, lower, upper })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpIrlConfig {
    /// Starting margin; `None` means `0.01·r_max`.
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpIrlFit {
    pub state_reward: DVector<f64>,
    /// `state_reward` broadcast over actions.
    pub reward: RewardTable,
    /// The margin at which the LP was feasible.
    pub margin: f64,
    pub objective_value: f64,
}

/// Run the pipeline from an already estimated policy.
pub fn lp_irl_from_estimate(
    dynamics: &Dynamics,
    est: &EstimatedPolicyMatrix,
    gamma_hat: f64,
    r_max: f64,
    margin: f64,
) -> Result<LpIrlFit> {
    let pe = estimate_expert_transitions(dynamics, est)?;
    let fmap = mapping_matrix(dynamics, &pe, est, gamma_hat)?;
    let n = dynamics.n_states();
    let mut beta = margin;
    loop {
        let problem = build_lp(&fmap, est, r_max, beta)?;
        let sol = solve_lp(&problem)?;
        match sol.status {
            LpStatus::Optimal => {
                let state_reward = sol.x.rows(0, n).into_owned();
                let reward = DMatrix::from_fn(n, dynamics.n_actions(), |s, _| state_reward[s]);
                return Ok(LpIrlFit { state_reward, reward, margin: beta, objective_value: sol.objective_value });
            }
            LpStatus::Unbounded => return Err(Error::Unbounded),
            LpStatus::Infeasible => {
                beta /= 10.0;
                if beta < MIN_MARGIN * (1.0 - 1e-9) {
                    return Err(Error::Infeasible);
                }
            }
        }
    }
}

/// Estimate the expert policy from `demos` and fit a state reward at
/// discount `gamma_hat`. Infeasible LPs are retried with the margin divided
/// by ten until it drops below [`MIN_MARGIN`].
pub fn lp_irl(
    dynamics: &Dynamics,
    demos: &DemonstrationSet,
    gamma_hat: f64,
    r_max: f64,
    config: &LpIrlConfig,
) -> Result<LpIrlFit> {
    let est = estimate_policy(demos);
    let margin = config.margin.unwrap_or(0.01 * r_max);
    lp_irl_from_estimate(dynamics, &est, gamma_hat, r_max, margin)
}

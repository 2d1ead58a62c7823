//! Expert demonstrations: sampling, policy estimation from counts, and
//! train/validation splits.

use std::path::Path;

use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{DeterministicPolicy, Dynamics};
use crate::seed;

/// `N` expert state-action pairs with their per-(s, a) counts.
#[derive(Clone, Debug, PartialEq)]
pub struct DemonstrationSet {
    pub pairs: Vec<(usize, usize)>,
    pub counts: DMatrix<u32>,
    pub seed: u64,
}

impl DemonstrationSet {
    pub fn from_pairs(pairs: Vec<(usize, usize)>, n_states: usize, n_actions: usize, seed: u64) -> Result<Self> {
        let mut counts = DMatrix::zeros(n_states, n_actions);
        for &(s, a) in &pairs {
            if s >= n_states || a >= n_actions {
                return Err(Error::dims(format!("pair ({s}, {a}) outside {n_states}×{n_actions}")));
            }
            counts[(s, a)] += 1;
        }
        Ok(DemonstrationSet { pairs, counts, seed })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.counts.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.counts.ncols()
    }

    /// Distinct demonstrated states, ascending.
    pub fn states(&self) -> Vec<usize> {
        (0..self.n_states()).filter(|&s| self.counts.row(s).iter().any(|&c| c > 0)).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["state", "action"])?;
        for &(s, a) in &self.pairs {
            w.write_record([s.to_string(), a.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Estimated expert policy: `chosen[s]` is the action with the strictly
/// largest positive count at `s`, if there is one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EstimatedPolicyMatrix {
    pub chosen: Vec<Option<usize>>,
    pub n_actions: usize,
}

impl EstimatedPolicyMatrix {
    /// Exactly the given deterministic policy on every state.
    pub fn full(policy: &DeterministicPolicy, n_actions: usize) -> Self {
        EstimatedPolicyMatrix { chosen: policy.actions.iter().map(|&a| Some(a)).collect(), n_actions }
    }

    pub fn n_states(&self) -> usize {
        self.chosen.len()
    }

    /// The `{0, 1}` matrix form.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.chosen.len(), self.n_actions);
        for (s, a) in self.chosen.iter().enumerate() {
            if let Some(a) = a {
                m[(s, *a)] = 1.0;
            }
        }
        m
    }

    pub fn demonstrated_states(&self) -> Vec<usize> {
        (0..self.chosen.len()).filter(|&s| self.chosen[s].is_some()).collect()
    }
}

/// Draw `n` states uniformly with replacement and label them with the
/// expert's action.
pub fn sample_pairs(expert: &DeterministicPolicy, n_actions: usize, n: usize, seed: u64) -> Result<DemonstrationSet> {
    let n_states = expert.n_states();
    if n_states == 0 {
        return Err(Error::invalid("expert policy has no states"));
    }
    let mut rng = seed::rng(seed);
    let pairs = (0..n)
        .map(|_| {
            let s = rng.gen_range(0..n_states);
            (s, expert.actions[s])
        })
        .collect();
    DemonstrationSet::from_pairs(pairs, n_states, n_actions, seed)
}

pub fn estimate_policy(demos: &DemonstrationSet) -> EstimatedPolicyMatrix {
    let chosen = (0..demos.n_states())
        .map(|s| {
            let row = demos.counts.row(s);
            let best = row.max();
            if best == 0 || row.iter().filter(|&&c| c == best).count() > 1 {
                None
            } else {
                row.iter().position(|&c| c == best)
            }
        })
        .collect();
    EstimatedPolicyMatrix { chosen, n_actions: demos.n_actions() }
}

/// Equal-length expert rollouts.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySet {
    pub trajectories: Vec<Vec<(usize, usize)>>,
    pub horizon: usize,
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<Vec<(usize, usize)>>, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if trajectories.iter().any(|t| t.len() != horizon) {
            return Err(Error::invalid("every trajectory must have length equal to the horizon"));
        }
        Ok(TrajectorySet { trajectories, horizon })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// All pairs flattened into a demonstration set.
    pub fn to_demonstrations(&self, n_states: usize, n_actions: usize, seed: u64) -> Result<DemonstrationSet> {
        let pairs = self.trajectories.iter().flatten().copied().collect();
        DemonstrationSet::from_pairs(pairs, n_states, n_actions, seed)
    }

    /// Empirical distribution of the first states.
    pub fn start_distribution(&self, n_states: usize) -> Vec<f64> {
        let mut rho = vec![0.0; n_states];
        let w = 1.0 / self.trajectories.len().max(1) as f64;
        for t in &self.trajectories {
            rho[t[0].0] += w;
        }
        rho
    }
}

/// `floor(n_pairs / horizon)` expert rollouts of length `horizon` from
/// uniformly drawn start states.
pub fn sample_trajectories(
    dynamics: &Dynamics,
    expert: &DeterministicPolicy,
    n_pairs: usize,
    horizon: usize,
    seed: u64,
) -> Result<TrajectorySet> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let n = dynamics.n_states();
    if expert.n_states() != n {
        return Err(Error::dims("expert policy and dynamics disagree on |S|"));
    }
    let mut rng = seed::rng(seed);
    let mut trajectories = Vec::with_capacity(n_pairs / horizon);
    for _ in 0..n_pairs / horizon {
        let mut s = rng.gen_range(0..n);
        let mut traj = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let a = expert.actions[s];
            traj.push((s, a));
            if t + 1 < horizon {
                let row = dynamics.action_matrix(a).row(s).iter().copied().collect::<Vec<_>>();
                let dist = WeightedIndex::new(&row).map_err(|e| Error::InvalidMdp(e.to_string()))?;
                s = dist.sample(&mut rng);
            }
        }
        trajectories.push(traj);
    }
    TrajectorySet::new(trajectories, horizon)
}

/// Seeded shuffle of `0..n` cut at `floor(train_fraction · n)`.
fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid("train_fraction must lie in (0, 1)"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng(seed));
    let n_train = (train_fraction * n as f64).floor() as usize;
    let val = idx.split_off(n_train);
    Ok((idx, val))
}

pub fn split_train_validation(
    demos: &DemonstrationSet,
    train_fraction: f64,
    seed: u64,
) -> Result<(DemonstrationSet, DemonstrationSet)> {
    let (train, val) = split_indices(demos.len(), train_fraction, seed)?;
    let pick = |idx: &[usize]| {
        let pairs = idx.iter().map(|&i| demos.pairs[i]).collect();
        DemonstrationSet::from_pairs(pairs, demos.n_states(), demos.n_actions(), seed)
    };
    Ok((pick(&train)?, pick(&val)?))
}

pub fn split_trajectories(trajs: &TrajectorySet, train_fraction: f64, seed: u64) -> Result<(TrajectorySet, TrajectorySet)> {
    let (train, val) = split_indices(trajs.len(), train_fraction, seed)?;
    let pick = |idx: &[usize]| TrajectorySet {
        trajectories: idx.iter().map(|&i| trajs.trajectories[i].clone()).collect(),
        horizon: trajs.horizon,
    };
    Ok((pick(&train), pick(&val)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{make_gridworld, GridSpec};
    use proptest::prelude::*;

    fn chain_expert(n: usize) -> DeterministicPolicy {
        DeterministicPolicy::new((0..n).map(|s| s % 2).collect(), 2).unwrap()
    }

    #[test]
    fn empty_and_single_samples() {
        let expert = chain_expert(4);
        let d = sample_pairs(&expert, 2, 0, 1).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.counts.sum(), 0);
        assert!(estimate_policy(&d).chosen.iter().all(Option::is_none));
        assert_eq!(estimate_policy(&d).matrix().sum(), 0.0);

        let d = sample_pairs(&expert, 2, 1, 1).unwrap();
        assert_eq!(d.counts.iter().filter(|&&c| c > 0).count(), 1);
    }

    #[test]
    fn tied_counts_give_a_zero_row() {
        let d = DemonstrationSet::from_pairs(vec![(0, 0), (0, 1), (0, 1), (0, 0), (1, 1), (1, 1), (1, 1)], 3, 2, 0)
            .unwrap();
        let est = estimate_policy(&d);
        assert_eq!(est.chosen, vec![None, Some(1), None]);
        let m = est.matrix();
        assert_eq!(m.row(0).sum(), 0.0);
        assert_eq!(m[(1, 1)], 1.0);
    }

    #[test]
    fn coverage_matches_uniform_sampling() {
        // Probability a fixed state is seen at least once in N uniform draws.
        let n_states = 20;
        let n = 10 * n_states;
        let expert = chain_expert(n_states);
        let expected = 1.0 - (1.0 - 1.0 / n_states as f64).powi(n as i32);
        let runs = 1000;
        let mut seen = vec![0usize; n_states];
        for seed in 0..runs {
            let d = sample_pairs(&expert, 2, n, seed).unwrap();
            for s in d.states() {
                seen[s] += 1;
            }
        }
        for (s, &k) in seen.iter().enumerate() {
            let freq = k as f64 / runs as f64;
            assert!((freq - expected).abs() <= 0.02, "state {s}: {freq} vs {expected}");
        }
    }

    #[test]
    fn plenty_of_data_recovers_the_expert() {
        let env = make_gridworld(&GridSpec::simple(2)).unwrap();
        let d = sample_pairs(&env.expert, 9, 50 * env.n_states(), 4).unwrap();
        let est = estimate_policy(&d);
        for s in 0..env.n_states() {
            assert_eq!(est.chosen[s], Some(env.expert.actions[s]));
        }
    }

    #[test]
    fn trajectory_counts() {
        let env = make_gridworld(&GridSpec::simple(2)).unwrap();
        let t = sample_trajectories(env.mdp.dynamics(), &env.expert, 100, 20, 3).unwrap();
        assert_eq!(t.len(), 5);
        assert!(t.trajectories.iter().all(|tr| tr.len() == 20));
        assert!(t.trajectories.iter().flatten().all(|&(s, a)| env.expert.actions[s] == a));

        let t = sample_trajectories(env.mdp.dynamics(), &env.expert, 7, 1, 3).unwrap();
        assert_eq!(t.len(), 7);
        let t = sample_trajectories(env.mdp.dynamics(), &env.expert, 7, 8, 3).unwrap();
        assert!(t.is_empty());
        assert!(sample_trajectories(env.mdp.dynamics(), &env.expert, 7, 0, 3).is_err());
    }

    #[test]
    fn deterministic_rollouts_follow_the_dynamics() {
        // a cycle 0 -> 1 -> 2 -> 0 under the only action
        let p = Dynamics::from_fn(3, 1, |s, _, t| if t == (s + 1) % 3 { 1.0 } else { 0.0 }).unwrap();
        let expert = DeterministicPolicy::constant(3, 0);
        let a = sample_trajectories(&p, &expert, 12, 4, 9).unwrap();
        let b = sample_trajectories(&p, &expert, 12, 4, 9).unwrap();
        assert_eq!(a, b);
        for tr in &a.trajectories {
            for w in tr.windows(2) {
                assert_eq!(w[1].0, (w[0].0 + 1) % 3);
            }
        }
    }

    #[test]
    fn split_sizes() {
        let expert = chain_expert(5);
        let d = sample_pairs(&expert, 2, 10, 0).unwrap();
        let (tr, va) = split_train_validation(&d, 0.8, 1).unwrap();
        assert_eq!((tr.len(), va.len()), (8, 2));
        assert_eq!(split_train_validation(&d, 0.8, 1).unwrap(), (tr, va));

        let d = sample_pairs(&expert, 2, 1, 0).unwrap();
        let (tr, va) = split_train_validation(&d, 0.8, 1).unwrap();
        assert_eq!((tr.len(), va.len()), (0, 1));
        assert!(split_train_validation(&d, 1.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn splits_conserve_pairs(n in 0usize..60, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let expert = chain_expert(7);
            let d = sample_pairs(&expert, 2, n, seed).unwrap();
            let (tr, va) = split_train_validation(&d, frac, seed ^ 1).unwrap();
            prop_assert_eq!(tr.len() + va.len(), n);
            prop_assert_eq!(&tr.counts + &va.counts, d.counts.clone());
        }

        #[test]
        fn estimate_never_contradicts_the_expert(n in 0usize..80, seed in any::<u64>()) {
            let expert = chain_expert(9);
            let d = sample_pairs(&expert, 2, n, seed).unwrap();
            prop_assert_eq!(d.counts.sum() as usize, n);
            for (s, a) in estimate_policy(&d).chosen.iter().enumerate() {
                if let Some(a) = a {
                    prop_assert_eq!(*a, expert.actions[s]);
                }
            }
        }
    }
}

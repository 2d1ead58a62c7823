//! Seeded generators for the Gridworld and Objectworld benchmark tasks.
//!
//! All tasks share one movement model on a `width×height` grid with nine
//! actions: action 0 stays put and actions 1..=8 step to the eight compass
//! neighbours (N, NE, E, SE, S, SW, W, NW). The intended move happens with
//! probability `1 − noise`; otherwise one of the nine moves is drawn
//! uniformly. Moves off the grid leave the agent in place. States are
//! indexed row-major, `s = y·width + x`.

mod file;

pub use file::{read_environment, write_environment, parse_environment, render_environment};

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{Dynamics, DeterministicPolicy, TabularMdp};
use crate::seed;

/// Ground-truth discount under which every expert is optimal.
pub const GAMMA0: f64 = 0.99;

pub const N_GRID_ACTIONS: usize = 9;

pub const DEFAULT_MOVE_NOISE: f64 = 0.1;

/// `(dx, dy)` for each action; `y` grows downwards.
pub const MOVES: [(i64, i64); N_GRID_ACTIONS] =
    [(0, 0), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub n_goals: usize,
    pub goal_reward: f64,
    pub move_noise: f64,
    pub n_actions: usize,
    pub seed: u64,
}

impl GridSpec {
    /// 10×10 grid with 4 goals.
    pub fn simple(seed: u64) -> Self {
        GridSpec { width: 10, height: 10, n_goals: 4, goal_reward: 1.0, move_noise: DEFAULT_MOVE_NOISE, n_actions: 9, seed }
    }

    /// 15×15 grid with 6 goals.
    pub fn hard(seed: u64) -> Self {
        GridSpec { width: 15, height: 15, n_goals: 6, ..GridSpec::simple(seed) }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("grid dimensions must be positive"));
        }
        if self.n_goals == 0 || self.n_goals > self.width * self.height {
            return Err(Error::invalid(format!(
                "n_goals = {} must lie in 1..={}",
                self.n_goals,
                self.width * self.height
            )));
        }
        if !(0.0..=1.0).contains(&self.move_noise) {
            return Err(Error::invalid("move_noise must be a probability"));
        }
        if self.n_actions != N_GRID_ACTIONS {
            return Err(Error::invalid("grid tasks use exactly 9 actions"));
        }
        if !(self.goal_reward > 0.0) {
            return Err(Error::invalid("goal_reward must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectworldSpec {
    pub width: usize,
    pub height: usize,
    pub n_objects: usize,
    pub n_colors: usize,
    pub nonlinear: bool,
    pub seed: u64,
}

impl ObjectworldSpec {
    pub fn linear(seed: u64) -> Self {
        ObjectworldSpec { width: 10, height: 10, n_objects: 10, n_colors: 2, nonlinear: false, seed }
    }

    pub fn nonlinear(seed: u64) -> Self {
        ObjectworldSpec { nonlinear: true, ..ObjectworldSpec::linear(seed) }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("grid dimensions must be positive"));
        }
        if self.n_objects > self.width * self.height {
            return Err(Error::invalid("more objects than cells"));
        }
        if self.n_colors < 2 {
            return Err(Error::invalid("objectworld needs at least two colours"));
        }
        Ok(())
    }
}

/// An Objectworld object at `cell` with outer and inner colour indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Object {
    pub cell: usize,
    pub outer: usize,
    pub inner: usize,
}

/// State features `φ(s)`, one row per state.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub features: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn new(features: DMatrix<f64>) -> Result<Self> {
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("features must be finite"));
        }
        Ok(FeatureMatrix { features })
    }

    pub fn n_states(&self) -> usize {
        self.features.nrows()
    }

    /// Feature dimension `D`.
    pub fn d(&self) -> usize {
        self.features.ncols()
    }
}

/// One-hot state features: `φ(s) = e_s`.
pub fn indicator_features(n_states: usize) -> FeatureMatrix {
    FeatureMatrix { features: DMatrix::identity(n_states, n_states) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvKind {
    Gridworld,
    ObjectworldLinear,
    ObjectworldNonlinear,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Gridworld => "gridworld",
            EnvKind::ObjectworldLinear => "objectworld-linear",
            EnvKind::ObjectworldNonlinear => "objectworld-nonlinear",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "gridworld" => Some(EnvKind::Gridworld),
            "objectworld-linear" => Some(EnvKind::ObjectworldLinear),
            "objectworld-nonlinear" => Some(EnvKind::ObjectworldNonlinear),
            _ => None,
        }
    }
}

/// A generated task instance: MDP, ground-truth expert and features.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub kind: EnvKind,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub mdp: TabularMdp,
    pub expert: DeterministicPolicy,
    pub goals: Vec<usize>,
    pub objects: Vec<Object>,
    pub n_colors: usize,
    pub features: FeatureMatrix,
}

impl Environment {
    pub fn n_states(&self) -> usize {
        self.mdp.n_states()
    }
}

fn step(width: usize, height: usize, s: usize, a: usize) -> usize {
    let (x, y) = ((s % width) as i64, (s / width) as i64);
    let (dx, dy) = MOVES[a];
    let (nx, ny) = (x + dx, y + dy);
    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
        s
    } else {
        ny as usize * width + nx as usize
    }
}

/// The shared noisy nine-action grid dynamics.
pub fn grid_dynamics(width: usize, height: usize, noise: f64) -> Result<Dynamics> {
    let n = width * height;
    let mut data = vec![0.0; n * N_GRID_ACTIONS * n];
    let slip = noise / N_GRID_ACTIONS as f64;
    for s in 0..n {
        for a in 0..N_GRID_ACTIONS {
            let row = &mut data[(s * N_GRID_ACTIONS + a) * n..(s * N_GRID_ACTIONS + a + 1) * n];
            row[step(width, height, s, a)] += 1.0 - noise;
            for b in 0..N_GRID_ACTIONS {
                row[step(width, height, s, b)] += slip;
            }
        }
    }
    Dynamics::from_row_major(n, N_GRID_ACTIONS, &data)
}

/// Chebyshev ("grid") distance between two cells.
pub fn grid_distance(width: usize, a: usize, b: usize) -> usize {
    let (ax, ay) = (a % width, a / width);
    let (bx, by) = (b % width, b / width);
    ax.abs_diff(bx).max(ay.abs_diff(by))
}

fn expert_for(mdp: &TabularMdp) -> Result<DeterministicPolicy> {
    let v = mdp.value_iteration(GAMMA0, crate::mdp::DEFAULT_VI_TOL)?;
    mdp.greedy_policy(&v, GAMMA0)
}

/// Gridworld with `+goal_reward` at each goal state (for every action) and
/// zero elsewhere. Goals are not absorbing. The expert is greedy under the
/// ground-truth reward at `GAMMA0`.
pub fn make_gridworld(spec: &GridSpec) -> Result<Environment> {
    spec.validate()?;
    let n = spec.width * spec.height;
    let mut rng = seed::rng(spec.seed);
    let mut goals = sample(&mut rng, n, spec.n_goals).into_vec();
    goals.sort_unstable();
    let dynamics = grid_dynamics(spec.width, spec.height, spec.move_noise)?;
    let mut rewards = DMatrix::zeros(n, N_GRID_ACTIONS);
    for &g in &goals {
        rewards.row_mut(g).fill(spec.goal_reward);
    }
    let mdp = TabularMdp::new(dynamics, rewards, spec.goal_reward)?;
    let expert = expert_for(&mdp)?;
    Ok(Environment {
        kind: EnvKind::Gridworld,
        width: spec.width,
        height: spec.height,
        seed: spec.seed,
        mdp,
        expert,
        goals,
        objects: Vec::new(),
        n_colors: 0,
        features: indicator_features(n),
    })
}

/// Minimum Chebyshev distance from `cell` to any object matching `pred`.
fn nearest(width: usize, cell: usize, objects: &[Object], pred: impl Fn(&Object) -> bool) -> Option<usize> {
    objects.iter().filter(|o| pred(o)).map(|o| grid_distance(width, cell, o.cell)).min()
}

/// Objectworld state rewards before the non-negativity shift.
pub fn objectworld_raw_rewards(width: usize, height: usize, objects: &[Object], nonlinear: bool) -> Vec<f64> {
    (0..width * height)
        .map(|s| {
            if nonlinear {
                let near = |c: usize, k: usize| nearest(width, s, objects, |o| o.outer == c).is_some_and(|d| d <= k);
                if near(0, 3) && near(1, 2) {
                    1.0
                } else if near(1, 3) {
                    -1.0
                } else {
                    0.0
                }
            } else {
                match objects.iter().find(|o| o.cell == s).map(|o| o.outer) {
                    Some(0) => 3.0,
                    Some(1) => 1.0,
                    _ => 0.0,
                }
            }
        })
        .collect()
}

/// Binary distance-threshold features `1{dist(s, colour c) ≤ k}` for
/// `k = 1..=max(width, height)`, first for every outer colour and then for
/// every inner colour.
pub fn objectworld_features(width: usize, height: usize, n_colors: usize, objects: &[Object]) -> FeatureMatrix {
    let n = width * height;
    let span = width.max(height);
    let d = 2 * n_colors * span;
    let mut features = DMatrix::zeros(n, d);
    for s in 0..n {
        for (block, inner) in [false, true].into_iter().enumerate() {
            for c in 0..n_colors {
                let dist = nearest(width, s, objects, |o| if inner { o.inner == c } else { o.outer == c });
                if let Some(dist) = dist {
                    let base = (block * n_colors + c) * span;
                    for k in 1..=span {
                        if dist <= k {
                            features[(s, base + k - 1)] = 1.0;
                        }
                    }
                }
            }
        }
    }
    FeatureMatrix { features }
}

/// Objectworld with randomly placed, randomly coloured objects. The
/// nonlinear variant's rewards are shifted by +1 so that they lie in
/// `[0, 2]`; the shift leaves every optimal policy unchanged.
pub fn make_objectworld(spec: &ObjectworldSpec) -> Result<Environment> {
    spec.validate()?;
    let n = spec.width * spec.height;
    let mut rng = seed::rng(spec.seed);
    let cells = sample(&mut rng, n, spec.n_objects).into_vec();
    let objects: Vec<Object> = cells
        .into_iter()
        .map(|cell| {
            let outer = rng.gen_range(0..spec.n_colors);
            let inner = rng.gen_range(0..spec.n_colors);
            Object { cell, outer, inner }
        })
        .collect();
    build_objectworld(spec.width, spec.height, spec.n_colors, spec.nonlinear, spec.seed, objects)
}

pub(crate) fn build_objectworld(
    width: usize,
    height: usize,
    n_colors: usize,
    nonlinear: bool,
    seed: u64,
    objects: Vec<Object>,
) -> Result<Environment> {
    let n = width * height;
    let raw = objectworld_raw_rewards(width, height, &objects, nonlinear);
    let (shift, r_max) = if nonlinear { (1.0, 2.0) } else { (0.0, 3.0) };
    let rewards = DMatrix::from_fn(n, N_GRID_ACTIONS, |s, _| raw[s] + shift);
    let dynamics = grid_dynamics(width, height, DEFAULT_MOVE_NOISE)?;
    let mdp = TabularMdp::new(dynamics, rewards, r_max)?;
    let expert = expert_for(&mdp)?;
    let features = objectworld_features(width, height, n_colors, &objects);
    Ok(Environment {
        kind: if nonlinear { EnvKind::ObjectworldNonlinear } else { EnvKind::ObjectworldLinear },
        width,
        height,
        seed,
        mdp,
        expert,
        goals: Vec::new(),
        objects,
        n_colors,
        features,
    })
}

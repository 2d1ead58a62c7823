//! Tabular inverse reinforcement learning with a learned effective horizon.
//!
//! The crate provides tabular MDP solvers, seeded Gridworld/Objectworld
//! generators, demonstration sampling, two IRL learners (a linear-programming
//! learner parameterised by a discount and a maximum-entropy learner
//! parameterised by a horizon), cross-validated selection of that
//! discount/horizon, numerical checks of the supporting theory, and an
//! experiment runner.
//!
//! Examples in `examples/`:
//!
//! - `env_roundtrip`: generate, save and reload an environment
//! - `gridworld_lp_irl`: recover a reward with LP-IRL at several discounts
//! - `maxent_horizons`: MaxEnt IRL with finite horizons on Objectworld
//! - `cross_validation`: pick the discount by cross-validation
//! - `policy_class`: optimal-policy counts and the reward certificates
//! - `value_gap_bounds`: the value-gap bounds across data sizes
//! - `sweep_and_plot`: a small experiment sweep with SVG figures

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demos;
pub mod env;
pub mod error;
pub mod experiment;
pub mod io;
pub mod lp;
pub mod maxent;
pub mod mdp;
pub mod plot;
pub mod seed;
pub mod select;
pub mod theory;

pub use error::{Error, Result};
pub use mdp::{DeterministicPolicy, Dynamics, QTable, RewardTable, TabularMdp, ValueTable};

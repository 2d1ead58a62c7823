//! Linear programming and LP-based IRL.

pub mod irl;
pub mod simplex;

pub use irl::{build_lp, estimate_expert_transitions, lp_irl, lp_irl_from_estimate, mapping_matrix, LpIrlConfig, LpIrlFit, MappingMatrix};
pub use simplex::{solve_lp, LpProblem, LpSolution, LpStatus, FEASIBILITY_TOL};

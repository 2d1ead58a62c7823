//! Linear programs in inequality form and their solution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Feasibility tolerance for reported solutions.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// maximize `cᵀx` subject to `D x ≤ b` and `lower ≤ x ≤ upper`.
/// Bounds may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub objective: DVector<f64>,
    pub constraints: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// Problem with `x ≥ 0` bounds.
    pub fn nonnegative(objective: DVector<f64>, constraints: DMatrix<f64>, rhs: DVector<f64>) -> Self {
        let n = objective.len();
        LpProblem { objective, constraints, rhs, lower: vec![0.0; n], upper: vec![f64::INFINITY; n] }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.rhs.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.constraints.ncols() != n || self.constraints.nrows() != self.rhs.len() {
            return Err(Error::dims(format!(
                "constraint matrix is {}×{}, expected {}×{n}",
                self.constraints.nrows(),
                self.constraints.ncols(),
                self.rhs.len()
            )));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::dims("bounds must have one entry per variable"));
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(Error::invalid(format!("bad bounds for variable {j}")));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(Error::invalid(format!("empty bounds for variable {j}")));
            }
        }
        if self.objective.iter().chain(self.constraints.iter()).chain(self.rhs.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("LP data must be finite"));
        }
        Ok(())
    }

    /// Largest violation of the constraints and bounds at `x`.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let row = (&self.constraints * x - &self.rhs).max().max(0.0);
        let bound = (0..x.len())
            .map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max);
        row.max(bound)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless `status` is `Optimal`.
    pub x: DVector<f64>,
    pub objective_value: f64,
}

/// Solve with the revised simplex method of the `minilp` crate. The
/// solver has no randomness, so identical problems give identical results.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};

    problem.validate()?;
    let n = problem.n_vars();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..n).map(|j| lp.add_var(problem.objective[j], (problem.lower[j], problem.upper[j]))).collect();
    for i in 0..problem.n_constraints() {
        let terms: Vec<_> = (0..n)
            .filter(|&j| problem.constraints[(i, j)] != 0.0)
            .map(|j| (vars[j], problem.constraints[(i, j)]))
            .collect();
        lp.add_constraint(&terms[..], ComparisonOp::Le, problem.rhs[i]);
    }
    match lp.solve() {
        Ok(sol) if !sol.objective().is_finite() => {
            Ok(LpSolution { status: LpStatus::Unbounded, x: DVector::zeros(0), objective_value: f64::INFINITY })
        }
        Ok(sol) => {
            let x = DVector::from_iterator(n, vars.iter().map(|&v| sol[v]));
            let objective_value = problem.objective.dot(&x);
            Ok(LpSolution { status: LpStatus::Optimal, x, objective_value })
        }
        Err(minilp::Error::Infeasible) => {
            Ok(LpSolution { status: LpStatus::Infeasible, x: DVector::zeros(0), objective_value: f64::NAN })
        }
        Err(minilp::Error::Unbounded) => {
            Ok(LpSolution { status: LpStatus::Unbounded, x: DVector::zeros(0), objective_value: f64::INFINITY })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    fn one_var(rows: &[(f64, f64)]) -> LpProblem {
        LpProblem::nonnegative(
            DVector::from_element(1, 1.0),
            DMatrix::from_fn(rows.len(), 1, |i, _| rows[i].0),
            DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1)),
        )
    }

    #[test]
    fn bounded_single_variable() {
        let sol = solve_lp(&one_var(&[(1.0, 3.0)])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-12);
        assert!((sol.objective_value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        // x ≥ 1 and x ≤ 0
        let sol = solve_lp(&one_var(&[(-1.0, -1.0), (1.0, 0.0)])).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_is_reported() {
        let sol = solve_lp(&one_var(&[(-1.0, 5.0)])).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_reflected_variables() {
        // maximize -x - y with x free, y ≤ 2 (lower −∞), x ≥ -4 via a row,
        // y ≥ -1 via a row: optimum x = -4, y = -1.
        let p = LpProblem {
            objective: DVector::from_vec(vec![-1.0, -1.0]),
            constraints: DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]),
            rhs: DVector::from_vec(vec![4.0, 1.0]),
            lower: vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
            upper: vec![f64::INFINITY, 2.0],
        };
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] + 4.0).abs() < 1e-9 && (sol.x[1] + 1.0).abs() < 1e-9);
        assert!((sol.objective_value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut p = one_var(&[(1.0, 3.0)]);
        p.rhs = DVector::zeros(2);
        assert!(matches!(solve_lp(&p), Err(Error::DimensionMismatch(_))));
    }

    /// Best vertex of `{x ≥ 0, A x ≤ b}` by trying every choice of 3 tight
    /// constraints among the 5 rows and 3 sign constraints.
    fn vertex_enumeration(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Option<f64> {
        let mut all = DMatrix::zeros(8, 3);
        let mut rhs = DVector::zeros(8);
        for i in 0..5 {
            all.row_mut(i).copy_from(&a.row(i));
            rhs[i] = b[i];
        }
        for j in 0..3 {
            all[(5 + j, j)] = -1.0;
        }
        let mut best: Option<f64> = None;
        for i in 0..8 {
            for j in i + 1..8 {
                for k in j + 1..8 {
                    let m = DMatrix::from_fn(3, 3, |r, col| all[([i, j, k][r], col)]);
                    let r = DVector::from_vec(vec![rhs[i], rhs[j], rhs[k]]);
                    let Some(x) = m.lu().solve(&r) else { continue };
                    if (&all * &x - &rhs).max() <= 1e-9 {
                        let v = c.dot(&x);
                        best = Some(best.map_or(v, |b: f64| b.max(v)));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn matches_vertex_enumeration() {
        for trial in 0..200u64 {
            let mut rng = seed::rng(seed::derive(41, trial));
            // nonnegative rows keep the region bounded; one mixed row adds variety
            let a = DMatrix::from_fn(5, 3, |i, _| if i < 4 { rng.gen_range(0.1..2.0) } else { rng.gen_range(-1.0..1.0) });
            let b = DVector::from_fn(5, |i, _| if i < 4 { rng.gen_range(1.0..5.0) } else { rng.gen_range(-0.5..2.0) });
            let c = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..2.0));
            let p = LpProblem::nonnegative(c.clone(), a.clone(), b.clone());
            let sol = solve_lp(&p).unwrap();
            match vertex_enumeration(&a, &b, &c) {
                Some(best) => {
                    assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
                    assert!((sol.objective_value - best).abs() < 1e-8, "trial {trial}: {} vs {best}", sol.objective_value);
                    assert!(p.max_violation(&sol.x) < FEASIBILITY_TOL);
                }
                None => assert_eq!(sol.status, LpStatus::Infeasible, "trial {trial}"),
            }
        }
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example for the largest-coefficient rule.
        let a = DMatrix::from_row_slice(3, 4, &[0.5, -5.5, -2.5, 9.0, 0.5, -1.5, -0.5, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let c = DVector::from_vec(vec![10.0, -57.0, -9.0, -24.0]);
        let sol = solve_lp(&LpProblem::nonnegative(c, a, b)).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-9);
    }
}

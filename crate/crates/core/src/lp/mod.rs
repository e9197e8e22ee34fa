//! Linear programs of the form
//!
//! ```text
//! maximise   c·x
//! subject to a_i·x (≤ | ≥) b_i   for each row i
//!            x ≥ 0  or  x free
//! ```
//!
//! solved by a dense two-phase simplex over any [`Scalar`]: `f64` for
//! everyday use, [`BigRational`](num_rational::BigRational) for exact goldens.
//!
//! Dual sign convention: under maximisation, duals of `≤` rows are `≥ 0` and
//! duals of `≥` rows are `≤ 0`; at an optimum `c·x = b·y`.

mod scalar;
mod simplex;

pub use scalar::Scalar;

use crate::error::{Error, Result};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableBound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    /// Row-major m×n constraint matrix.
    pub constraints: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub senses: Vec<Sense>,
    pub bound: VariableBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: Status,
    /// Empty unless `status` is `Optimal`.
    pub primal: Vec<T>,
    /// One entry per constraint row; empty unless `status` is `Optimal`.
    pub dual: Vec<T>,
    pub value: T,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(
        objective: Vec<T>,
        constraints: Vec<Vec<T>>,
        rhs: Vec<T>,
        senses: Vec<Sense>,
        bound: VariableBound,
    ) -> Result<Self> {
        let lp = Self { objective, constraints, rhs, senses, bound };
        lp.check_dimensions()?;
        Ok(lp)
    }

    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    pub fn row_count(&self) -> usize {
        self.constraints.len()
    }

    fn check_dimensions(&self) -> Result<()> {
        let n = self.objective.len();
        let m = self.constraints.len();
        if self.rhs.len() != m || self.senses.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "{m} constraint rows, {} rhs entries, {} senses",
                self.rhs.len(),
                self.senses.len()
            )));
        }
        if let Some((i, row)) = self.constraints.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::ShapeMismatch(format!(
                "constraint row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        Ok(())
    }

    /// Solves the program and verifies the optimum: primal residual within
    /// τ_lp and duality gap within τ_gap (both exact for rationals).
    pub fn solve(&self) -> Result<LpSolution<T>> {
        self.check_dimensions()?;
        let solution = simplex::solve(self)?;
        if solution.status == Status::Optimal {
            self.verify(&solution)?;
        }
        Ok(solution)
    }

    fn verify(&self, sol: &LpSolution<T>) -> Result<()> {
        let feas = T::scaled_tolerance(tolerance::LP_FEASIBILITY);
        let gap_tol = T::scaled_tolerance(tolerance::DUALITY_GAP);
        let fail = |what: String| Err(Error::NumericalFailure(what));

        for (i, row) in self.constraints.iter().enumerate() {
            let lhs = dot(row, &sol.primal);
            let ok = match self.senses[i] {
                Sense::Le => lhs <= self.rhs[i].clone() + feas.clone(),
                Sense::Ge => lhs >= self.rhs[i].clone() - feas.clone(),
            };
            if !ok {
                return fail(format!("primal row {i} violated"));
            }
            let sign_ok = match self.senses[i] {
                Sense::Le => sol.dual[i] >= -feas.clone(),
                Sense::Ge => sol.dual[i] <= feas.clone(),
            };
            if !sign_ok {
                return fail(format!("dual sign wrong on row {i}"));
            }
        }
        if self.bound == VariableBound::NonNegative
            && sol.primal.iter().any(|x| *x < -feas.clone())
        {
            return fail("negative primal variable".into());
        }
        for j in 0..self.variable_count() {
            let reduced = self
                .constraints
                .iter()
                .zip(&sol.dual)
                .fold(T::zero(), |acc, (row, y)| acc + row[j].clone() * y.clone())
                - self.objective[j].clone();
            let ok = match self.bound {
                VariableBound::NonNegative => reduced >= -feas.clone(),
                VariableBound::Free => reduced.abs_value() <= feas.clone(),
            };
            if !ok {
                return fail(format!("dual constraint {j} violated"));
            }
        }
        let primal_value = dot(&self.objective, &sol.primal);
        let dual_value = dot(&self.rhs, &sol.dual);
        if (primal_value - dual_value).abs_value() > gap_tol {
            return fail("duality gap above tolerance".into());
        }
        Ok(())
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        if x.is_zero() || y.is_zero() {
            acc
        } else {
            acc + x.clone() * y.clone()
        }
    })
}

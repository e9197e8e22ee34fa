//! Dense two-phase tableau simplex.
//!
//! Rows are brought to `≤` form; a row with negative right-hand side is
//! negated and given an artificial variable for phase one. Pricing is
//! Dantzig's rule, falling back to Bland's rule after a run of degenerate
//! pivots so the method always terminates.

use super::{LinearProgram, LpSolution, Scalar, Sense, Status, VariableBound};
use crate::error::{Error, Result};

const DEGENERATE_STREAK_LIMIT: usize = 50;

struct Tableau<T> {
    /// m rows of `ncols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<T>>,
    /// Reduced costs d_j = c_B B⁻¹ a_j − c_j; last entry is the objective value.
    costs: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
    enterable: Vec<bool>,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, i: usize) -> &T {
        &self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = T::one() / self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nonzero: Vec<usize> = (0..=self.ncols).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut Vec<T>| {
            let factor = row[c].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &nonzero {
                row[j] = row[j].clone() - factor.clone() * pivot_row[j].clone();
            }
            row[c] = T::zero();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.costs);
        self.rows[r] = pivot_row;
        self.rows[r][c] = T::one();
        self.basis[r] = c;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let tol = T::pivot_tolerance();
        let mut best: Option<usize> = None;
        for j in 0..self.ncols {
            if !self.enterable[j] || !(self.costs[j] < -tol.clone()) {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|b| self.costs[j] < self.costs[b]) {
                best = Some(j);
            }
        }
        best
    }

    fn leaving(&self, c: usize) -> Option<usize> {
        let tol = T::pivot_tolerance();
        let mut best: Option<(usize, T)> = None;
        for i in 0..self.rows.len() {
            let a = &self.rows[i][c];
            if !(*a > tol) {
                continue;
            }
            let rhs = self.rhs(i).clone();
            let rhs = if rhs < T::zero() { T::zero() } else { rhs };
            let ratio = rhs / a.clone();
            let better = match &best {
                None => true,
                Some((b, r)) => {
                    ratio < *r || (!(ratio > *r) && self.basis[i] < self.basis[*b])
                }
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, max_iterations: usize) -> Result<Phase> {
        let mut bland = false;
        let mut streak = 0;
        for _ in 0..max_iterations {
            let Some(c) = self.entering(bland) else {
                return Ok(Phase::Optimal);
            };
            let Some(r) = self.leaving(c) else {
                return Ok(Phase::Unbounded);
            };
            if self.rhs(r).abs_value() <= T::pivot_tolerance() {
                streak += 1;
                if streak > DEGENERATE_STREAK_LIMIT {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::NumericalFailure(format!("no convergence after {max_iterations} pivots")))
    }

    fn price(&mut self, cost: &[T]) {
        for j in 0..=self.ncols {
            let mut d = if j < self.ncols { -cost[j].clone() } else { T::zero() };
            for (i, row) in self.rows.iter().enumerate() {
                let cb = &cost[self.basis[i]];
                if !cb.is_zero() && !row[j].is_zero() {
                    d = d + cb.clone() * row[j].clone();
                }
            }
            self.costs[j] = d;
        }
    }
}

pub(super) fn solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    let n = lp.variable_count();
    let m = lp.row_count();
    let free = lp.bound == VariableBound::Free;
    let nstruct = if free { 2 * n } else { n };

    // ≤ form: row i reads (sign_i · a_i)·x ≤ sign_i · b_i.
    let mut normalized: Vec<(Vec<T>, T)> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = lp.senses[i] == Sense::Ge;
        let mut row = Vec::with_capacity(nstruct);
        for a in &lp.constraints[i] {
            row.push(if flip { -a.clone() } else { a.clone() });
        }
        if free {
            for j in 0..n {
                row.push(-row[j].clone());
            }
        }
        let b = if flip { -lp.rhs[i].clone() } else { lp.rhs[i].clone() };
        normalized.push((row, b));
    }

    let needs_artificial: Vec<usize> =
        (0..m).filter(|&i| normalized[i].1 < T::zero()).collect();
    let nart = needs_artificial.len();
    let slack0 = nstruct;
    let art0 = nstruct + m;
    let ncols = nstruct + m + nart;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_of_row = vec![None; m];
    for (k, &i) in needs_artificial.iter().enumerate() {
        art_of_row[i] = Some(k);
    }
    for (i, (a, b)) in normalized.into_iter().enumerate() {
        let mut row = vec![T::zero(); ncols + 1];
        match art_of_row[i] {
            None => {
                row[..nstruct].clone_from_slice(&a);
                row[slack0 + i] = T::one();
                row[ncols] = b;
                basis.push(slack0 + i);
            }
            Some(k) => {
                for (dst, src) in row.iter_mut().zip(a) {
                    *dst = -src;
                }
                row[slack0 + i] = -T::one();
                row[art0 + k] = T::one();
                row[ncols] = -b;
                basis.push(art0 + k);
            }
        }
        rows.push(row);
    }

    let mut tableau = Tableau {
        rows,
        costs: vec![T::zero(); ncols + 1],
        basis,
        ncols,
        enterable: vec![true; ncols],
    };
    let max_iterations = 50_000 + 50 * (m + ncols);

    if nart > 0 {
        let mut phase1_cost = vec![T::zero(); ncols];
        for c in phase1_cost.iter_mut().skip(art0) {
            *c = -T::one();
        }
        tableau.price(&phase1_cost);
        if let Phase::Unbounded = tableau.run(max_iterations)? {
            return Err(Error::NumericalFailure("phase one reported unbounded".into()));
        }
        let infeasibility = -tableau.costs[ncols].clone();
        if infeasibility > T::scaled_tolerance(crate::tolerance::LP_FEASIBILITY) {
            return Ok(infeasible_solution());
        }
        // Drive zero-level artificials out of the basis.
        for i in 0..m {
            if tableau.basis[i] < art0 {
                continue;
            }
            let pick = (0..art0)
                .filter(|&j| tableau.rows[i][j].abs_value() > T::pivot_tolerance())
                .max_by(|&a, &b| {
                    tableau.rows[i][a]
                        .abs_value()
                        .partial_cmp(&tableau.rows[i][b].abs_value())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
            match pick {
                Some(j) => tableau.pivot(i, j),
                None => {
                    return Err(Error::NumericalFailure(
                        "artificial variable stuck in basis".into(),
                    ))
                }
            }
        }
        for e in tableau.enterable.iter_mut().skip(art0) {
            *e = false;
        }
    }

    let mut cost = vec![T::zero(); ncols];
    for j in 0..n {
        cost[j] = lp.objective[j].clone();
        if free {
            cost[n + j] = -lp.objective[j].clone();
        }
    }
    tableau.price(&cost);
    if let Phase::Unbounded = tableau.run(max_iterations)? {
        return Ok(LpSolution {
            status: Status::Unbounded,
            primal: Vec::new(),
            dual: Vec::new(),
            value: T::zero(),
        });
    }

    let mut expanded = vec![T::zero(); ncols];
    for (i, &b) in tableau.basis.iter().enumerate() {
        expanded[b] = tableau.rhs(i).clone();
    }
    let primal: Vec<T> = (0..n)
        .map(|j| {
            if free {
                expanded[j].clone() - expanded[n + j].clone()
            } else {
                expanded[j].clone()
            }
        })
        .collect();
    let dual: Vec<T> = (0..m)
        .map(|i| {
            let y = tableau.costs[slack0 + i].clone();
            match lp.senses[i] {
                Sense::Le => y,
                Sense::Ge => -y,
            }
        })
        .collect();
    let value = tableau.costs[ncols].clone();
    Ok(LpSolution { status: Status::Optimal, primal, dual, value })
}

fn infeasible_solution<T: Scalar>() -> LpSolution<T> {
    LpSolution { status: Status::Infeasible, primal: Vec::new(), dual: Vec::new(), value: T::zero() }
}

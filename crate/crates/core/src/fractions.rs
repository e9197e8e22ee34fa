//! Noncontextual / non-signalling fractions, the decompositions they induce,
//! and the Bell inequality read off the dual of the noncontextual program.
//!
//! With M the incidence matrix and v the flattened model:
//!
//! ```text
//! NCF(e) = max 1·b  s.t.  M b ≤ v,      b ≥ 0
//! NSF(e) = max 1·b  s.t.  0 ≤ M b ≤ v,  b free
//! ```
//!
//! and CF = 1 − NCF, SF = 1 − NSF.

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::empirical::{EmpiricalModel, Normalization};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpSolution, Scalar, Sense, Status, VariableBound};
use crate::scenario::{IncidenceMatrix, MeasurementScenario};
use crate::tolerance;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionResult {
    pub value: f64,
    /// Sub-probability vector b over global assignments.
    pub witness: Vec<f64>,
    /// Duals of the `M b ≤ v` rows.
    pub dual: Vec<f64>,
}

/// Exact counterpart of [`FractionResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFraction {
    pub value: BigRational,
    pub witness: Vec<BigRational>,
    pub dual: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Weight λ on `part_a`.
    pub weight: f64,
    /// Noncontextual (resp. non-signalling) part; absent when λ = 0.
    pub part_a: Option<EmpiricalModel>,
    /// Residual part; absent when λ = 1.
    pub part_b: Option<EmpiricalModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellInequality {
    /// Optimal y of min y·v s.t. Mᵀy ≥ 1, y ≥ 0.
    pub raw_dual: Vec<f64>,
    /// a = |M|⁻¹·1 − y, one coefficient per local assignment.
    pub coefficients: Vec<f64>,
    /// max over deterministic global assignments d of a·v^d.
    pub classical_bound: f64,
    /// a·v for the source model; equals CF.
    pub normalized_violation: f64,
}

fn dense<T: Scalar>(m: &IncidenceMatrix) -> Vec<Vec<T>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|&x| if x == 1 { T::one() } else { T::zero() }).collect())
        .collect()
}

fn ncf_program<T: Scalar>(m: &IncidenceMatrix, v: &[T]) -> Result<LinearProgram<T>> {
    LinearProgram::new(
        vec![T::one(); m.cols()],
        dense(m),
        v.to_vec(),
        vec![Sense::Le; m.rows()],
        VariableBound::NonNegative,
    )
}

fn nsf_program<T: Scalar>(m: &IncidenceMatrix, v: &[T]) -> Result<LinearProgram<T>> {
    let rows = dense::<T>(m);
    let mut constraints = rows.clone();
    constraints.extend(rows);
    let mut rhs = v.to_vec();
    rhs.extend(std::iter::repeat_n(T::zero(), m.rows()));
    let mut senses = vec![Sense::Le; m.rows()];
    senses.extend(std::iter::repeat_n(Sense::Ge, m.rows()));
    LinearProgram::new(vec![T::one(); m.cols()], constraints, rhs, senses, VariableBound::Free)
}

fn optimal<T: Scalar>(solution: LpSolution<T>, what: &str) -> Result<LpSolution<T>> {
    match solution.status {
        Status::Optimal => Ok(solution),
        status => Err(Error::NumericalFailure(format!("{what} program reported {status:?}"))),
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

pub fn noncontextual_fraction(e: &EmpiricalModel) -> Result<FractionResult> {
    let m = e.scenario().incidence_matrix()?;
    let sol = optimal(ncf_program(&m, &e.flat())?.solve()?, "noncontextual")?;
    Ok(FractionResult { value: clamp_unit(sol.value), witness: sol.primal, dual: sol.dual })
}

pub fn contextual_fraction(e: &EmpiricalModel) -> Result<f64> {
    Ok(1.0 - noncontextual_fraction(e)?.value)
}

pub fn nonsignalling_fraction(e: &EmpiricalModel) -> Result<FractionResult> {
    let m = e.scenario().incidence_matrix()?;
    let rows = m.rows();
    let mut sol = optimal(nsf_program(&m, &e.flat())?.solve()?, "non-signalling")?;
    sol.dual.truncate(rows);
    Ok(FractionResult { value: clamp_unit(sol.value), witness: sol.primal, dual: sol.dual })
}

pub fn signalling_fraction(e: &EmpiricalModel) -> Result<f64> {
    Ok(1.0 - nonsignalling_fraction(e)?.value)
}

/// Exact rational image of a model's flat vector (each f64 converted exactly).
pub fn exact_vector(e: &EmpiricalModel) -> Vec<BigRational> {
    e.flat().into_iter().map(BigRational::from_f64).collect()
}

fn check_exact_len(scenario: &MeasurementScenario, v: &[BigRational]) -> Result<()> {
    if v.len() != scenario.local_count() {
        return Err(Error::ShapeMismatch(format!(
            "exact vector has {} entries, expected {}",
            v.len(),
            scenario.local_count()
        )));
    }
    Ok(())
}

pub fn noncontextual_fraction_exact(
    scenario: &MeasurementScenario,
    v: &[BigRational],
) -> Result<ExactFraction> {
    check_exact_len(scenario, v)?;
    let m = scenario.incidence_matrix()?;
    let sol = optimal(ncf_program(&m, v)?.solve()?, "noncontextual")?;
    Ok(ExactFraction { value: sol.value, witness: sol.primal, dual: sol.dual })
}

pub fn nonsignalling_fraction_exact(
    scenario: &MeasurementScenario,
    v: &[BigRational],
) -> Result<ExactFraction> {
    check_exact_len(scenario, v)?;
    let m = scenario.incidence_matrix()?;
    let rows = m.rows();
    let mut sol = optimal(nsf_program(&m, v)?.solve()?, "non-signalling")?;
    sol.dual.truncate(rows);
    Ok(ExactFraction { value: sol.value, witness: sol.primal, dual: sol.dual })
}

pub fn contextual_fraction_exact(
    scenario: &MeasurementScenario,
    v: &[BigRational],
) -> Result<BigRational> {
    Ok(BigRational::one() - noncontextual_fraction_exact(scenario, v)?.value)
}

/// Solves the dual program min y·v s.t. Mᵀy ≥ 1, y ≥ 0 directly.
/// Returns its optimal value (= NCF) and y.
pub fn dual_noncontextual_fraction(e: &EmpiricalModel) -> Result<(f64, Vec<f64>)> {
    let m = e.scenario().incidence_matrix()?;
    let v = e.flat();
    let transpose: Vec<Vec<f64>> = (0..m.cols())
        .map(|g| {
            let mut col = vec![0.0; m.rows()];
            for &r in m.column_support(g) {
                col[r] = 1.0;
            }
            col
        })
        .collect();
    let lp = LinearProgram::new(
        v.iter().map(|x| -x).collect(),
        transpose,
        vec![1.0; m.cols()],
        vec![Sense::Ge; m.cols()],
        VariableBound::NonNegative,
    )?;
    let sol = optimal(lp.solve()?, "dual noncontextual")?;
    Ok((-sol.value, sol.primal))
}

/// Model whose context tables are the given raw non-negative weights,
/// rescaled to sum to one. Round-off negatives are clamped first.
fn model_from_weights(scenario: &Arc<MeasurementScenario>, raw: &[f64]) -> Result<EmpiricalModel> {
    let clamped: Vec<f64> = raw.iter().map(|x| x.max(0.0)).collect();
    EmpiricalModel::from_flat(scenario.clone(), &clamped, Normalization::Renormalize)
        .map_err(|err| Error::NumericalFailure(format!("degenerate decomposition part: {err}")))
}

fn decompose(e: &EmpiricalModel, fraction: &FractionResult) -> Result<Decomposition> {
    let scenario = e.scenario();
    let mut lambda = fraction.value;
    if lambda <= tolerance::DUALITY_GAP {
        lambda = 0.0;
    } else if lambda >= 1.0 - tolerance::DUALITY_GAP {
        lambda = 1.0;
    }
    if lambda == 0.0 {
        return Ok(Decomposition { weight: 0.0, part_a: None, part_b: Some(e.clone()) });
    }
    let m = scenario.incidence_matrix()?;
    let mb = m.apply(&fraction.witness);
    let part_a = model_from_weights(scenario, &mb)?;
    if lambda == 1.0 {
        return Ok(Decomposition { weight: 1.0, part_a: Some(part_a), part_b: None });
    }
    let residual: Vec<f64> = e.flat().iter().zip(&mb).map(|(v, x)| v - x).collect();
    let part_b = model_from_weights(scenario, &residual)?;
    Ok(Decomposition { weight: lambda, part_a: Some(part_a), part_b: Some(part_b) })
}

/// e = λ·e^NC + (1−λ)·e′ with λ = NCF(e).
pub fn nc_decomposition(e: &EmpiricalModel) -> Result<Decomposition> {
    decompose(e, &noncontextual_fraction(e)?)
}

/// e = λ·e^NS + (1−λ)·e′ with λ = NSF(e).
pub fn ns_decomposition(e: &EmpiricalModel) -> Result<Decomposition> {
    decompose(e, &nonsignalling_fraction(e)?)
}

/// Bell inequality optimised for `e`, from the explicitly solved dual.
pub fn bell_inequality(e: &EmpiricalModel) -> Result<BellInequality> {
    let scenario = e.scenario();
    let m = scenario.incidence_matrix()?;
    let (_, y) = dual_noncontextual_fraction(e)?;
    let share = 1.0 / scenario.context_count() as f64;
    let coefficients: Vec<f64> = y.iter().map(|yi| share - yi).collect();
    let classical_bound = m.apply_transpose(&coefficients).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let normalized_violation =
        coefficients.iter().zip(e.flat()).map(|(a, v)| a * v).sum::<f64>();
    Ok(BellInequality { raw_dual: y, coefficients, classical_bound, normalized_violation })
}

impl BellInequality {
    /// Value a·v of the inequality on an arbitrary model of the same size.
    pub fn evaluate(&self, e: &EmpiricalModel) -> Result<f64> {
        let v = e.flat();
        if v.len() != self.coefficients.len() {
            return Err(Error::ScenarioMismatch);
        }
        Ok(self.coefficients.iter().zip(v).map(|(a, x)| a * x).sum())
    }
}

impl ExactFraction {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

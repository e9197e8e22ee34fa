//! Contextuality and signalling measures of empirical probability tables,
//! computed by linear programming, plus certification of contextuality that
//! survives bounded outcome indeterminism and parameter dependence in the
//! underlying hidden-variable model.
//!
//! The main entry points:
//!
//! - [`scenario::MeasurementScenario`] and its incidence matrix,
//! - [`empirical::EmpiricalModel`] with marginals, MIM and total variation,
//! - [`fractions`] for the contextual / signalling fractions and the Bell
//!   inequality read off the dual program,
//! - [`hvm`] for hidden-variable models and their η*/σ* defects,
//! - [`certify`] for the end-to-end `2η + σ < 1`, `CF > η` check.

pub mod catalog;
pub mod certify;
pub mod document;
pub mod empirical;
pub mod error;
pub mod fractions;
pub mod hvm;
pub mod lp;
pub mod scenario;
pub mod tolerance;

pub use empirical::{EmpiricalModel, Normalization};
pub use error::{Error, ErrorKind, Result};
pub use scenario::{IncidenceMatrix, MeasurementScenario};

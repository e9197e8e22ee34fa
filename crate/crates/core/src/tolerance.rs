//! Numerical tolerances shared across the crate.

/// Probability validation: negativity and per-context normalisation.
pub const PROBABILITY: f64 = 1e-9;

/// Primal feasibility residual accepted from the LP solver.
pub const LP_FEASIBILITY: f64 = 1e-9;

/// Duality gap accepted from the LP solver, and the slack allowed on
/// value-level identities (strong duality, continuity, the CF ≤ η bound).
pub const DUALITY_GAP: f64 = 1e-8;

/// Margin by which CF must exceed η before contextuality is certified.
pub const REPORT: f64 = 1e-6;

/// Default cap on the number of incidence-matrix entries (m·n).
pub const DEFAULT_SIZE_CAP: usize = 1_000_000;

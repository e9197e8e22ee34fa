//! Hidden-variable models ⟨Λ, p, (h^λ)⟩, their per-λ defects
//! η* (distance from outcome determinism) and σ* (distance from parameter
//! independence), and the n-cycle boundary behaviours with 2η* + σ* = 1.

use std::sync::Arc;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::catalog;
use crate::empirical::EmpiricalModel;
use crate::error::{Error, Result};
use crate::fractions;
use crate::tolerance;

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenVariableModel {
    lambdas: Vec<String>,
    prior: Vec<f64>,
    behaviours: Vec<EmpiricalModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaDefects {
    pub lambda: String,
    pub eta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HvmAudit {
    /// max over λ of η*_λ.
    pub eta: f64,
    /// max over λ of σ*_λ.
    pub sigma: f64,
    pub per_lambda: Vec<LambdaDefects>,
    /// 2·eta + sigma < 1 (strict).
    pub condition_ok: bool,
    pub realized_cf: f64,
}

impl HiddenVariableModel {
    pub fn new(
        lambdas: Vec<String>,
        prior: Vec<f64>,
        behaviours: Vec<EmpiricalModel>,
    ) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidInput("hidden-variable model has no λ".into()));
        }
        if lambdas.len() != prior.len() || lambdas.len() != behaviours.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels, {} prior weights, {} behaviours",
                lambdas.len(),
                prior.len(),
                behaviours.len()
            )));
        }
        for (i, label) in lambdas.iter().enumerate() {
            if label.is_empty() || lambdas[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        for (entry, &p) in prior.iter().enumerate() {
            if !p.is_finite() || p < -tolerance::PROBABILITY {
                return Err(Error::NegativeProbability { context: 0, entry, value: p });
            }
        }
        let sum: f64 = prior.iter().sum();
        if (sum - 1.0).abs() > tolerance::PROBABILITY {
            return Err(Error::NormalizationViolation { context: 0, sum });
        }
        let scenario = behaviours[0].scenario();
        if behaviours.iter().any(|h| !Arc::ptr_eq(h.scenario(), scenario) && **h.scenario() != **scenario)
        {
            return Err(Error::ScenarioMismatch);
        }
        let prior = prior.into_iter().map(|p| p.max(0.0)).collect();
        Ok(Self { lambdas, prior, behaviours })
    }

    /// Single hidden variable carrying `behaviour`.
    pub fn single(behaviour: EmpiricalModel) -> Self {
        Self { lambdas: vec!["l0".into()], prior: vec![1.0], behaviours: vec![behaviour] }
    }

    pub fn lambdas(&self) -> &[String] {
        &self.lambdas
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn behaviours(&self) -> &[EmpiricalModel] {
        &self.behaviours
    }

    /// h = Σ_λ p(λ)·h^λ, context by context.
    pub fn realized_behaviour(&self) -> Result<EmpiricalModel> {
        let first = &self.behaviours[0];
        let tables: Vec<Vec<f64>> = (0..first.tables().len())
            .map(|k| {
                let mut acc = vec![0.0; first.table(k).len()];
                for (p, h) in self.prior.iter().zip(&self.behaviours) {
                    for (a, x) in acc.iter_mut().zip(h.table(k)) {
                        *a += p * x;
                    }
                }
                acc
            })
            .collect();
        EmpiricalModel::new(first.scenario().clone(), tables)
    }

    /// Per-λ η*, σ* and the aggregated CF ≤ η check.
    pub fn audit(&self) -> Result<HvmAudit> {
        let mut per_lambda = Vec::with_capacity(self.lambdas.len());
        for (label, h) in self.lambdas.iter().zip(&self.behaviours) {
            per_lambda.push(LambdaDefects {
                lambda: label.clone(),
                eta: eta_star(h),
                sigma: sigma_star(h)?,
            });
        }
        let eta = per_lambda.iter().map(|d| d.eta).fold(0.0, f64::max);
        let sigma = per_lambda.iter().map(|d| d.sigma).fold(0.0, f64::max);
        let condition_ok = 2.0 * eta + sigma < 1.0;
        let realized_cf = fractions::contextual_fraction(&self.realized_behaviour()?)?;
        if condition_ok && realized_cf > eta + tolerance::DUALITY_GAP {
            return Err(Error::CfBoundViolation { cf: realized_cf, eta });
        }
        Ok(HvmAudit { eta, sigma, per_lambda, condition_ok, realized_cf })
    }
}

/// Smallest η with h = (1−η)·d + η·h″ for a deterministic (possibly
/// signalling) behaviour d: 1 − min over contexts of the largest entry.
pub fn eta_star(h: &EmpiricalModel) -> f64 {
    let worst = h
        .tables()
        .iter()
        .map(|t| t.iter().copied().fold(0.0, f64::max))
        .fold(1.0, f64::min);
    (1.0 - worst).clamp(0.0, 1.0)
}

/// Reference value for [`eta_star`]: 1 − max over every deterministic
/// behaviour d of min_C h_C(d_C), i.e. the largest r with r·d ≤ h,
/// by exhaustive enumeration. Refuses more than `limit` behaviours.
pub fn eta_star_by_enumeration(h: &EmpiricalModel, limit: usize) -> Result<f64> {
    let sizes: Vec<usize> = h.tables().iter().map(Vec::len).collect();
    let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    match total {
        Some(t) if t <= limit => {}
        _ => {
            return Err(Error::SizeCapExceeded {
                entries: sizes.iter().map(|&s| s as u128).product(),
                cap: limit,
            })
        }
    }
    let mut choice = vec![0usize; sizes.len()];
    let mut best = 0.0f64;
    loop {
        let r = choice
            .iter()
            .enumerate()
            .map(|(k, &j)| h.table(k)[j])
            .fold(f64::INFINITY, f64::min);
        best = best.max(r);
        // odometer increment
        let mut k = 0;
        loop {
            if k == sizes.len() {
                return Ok((1.0 - best).clamp(0.0, 1.0));
            }
            choice[k] += 1;
            if choice[k] < sizes[k] {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Smallest σ with h = (1−σ)·h_NS + σ·h′, i.e. SF(h).
pub fn sigma_star(h: &EmpiricalModel) -> Result<f64> {
    fractions::signalling_fraction(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryHvm {
    pub model: HiddenVariableModel,
    pub alpha: Rational64,
    pub eta_star: Rational64,
    pub sigma_star: Rational64,
    /// CF of the behaviour, from the LP.
    pub cf: f64,
}

/// h_ub = α·h_S1 + (1−α)·h_S2 on the n-cycle, for α ∈ [½, 1]. Closed forms
/// η* = 1 − α and σ* = 2α − 1 are cross-checked against the LP values.
pub fn boundary_hvm(n: usize, alpha: Rational64) -> Result<BoundaryHvm> {
    let half = Rational64::new(1, 2);
    let one = Rational64::from_integer(1);
    if alpha < half || alpha > one {
        return Err(Error::AlphaOutOfRange(alpha.to_string()));
    }
    let (s1, s2) = catalog::ncycle_vertices(n)?;
    let a = alpha.to_f64().unwrap_or(f64::NAN);
    let h = EmpiricalModel::mix(&s1, &s2, a)?;
    let eta_exact = one - alpha;
    let sigma_exact = Rational64::from_integer(2) * alpha - one;
    if sigma_exact + Rational64::from_integer(2) * eta_exact != one {
        return Err(Error::BoundaryCheckFailed("σ* + 2η* ≠ 1".into()));
    }
    let cf = fractions::contextual_fraction(&h)?;
    if (cf - 1.0).abs() > tolerance::DUALITY_GAP {
        return Err(Error::BoundaryCheckFailed(format!("CF = {cf}, expected 1")));
    }
    let eta_lp = eta_star(&h);
    let sigma_lp = sigma_star(&h)?;
    let eta_f = eta_exact.to_f64().unwrap_or(f64::NAN);
    let sigma_f = sigma_exact.to_f64().unwrap_or(f64::NAN);
    if (eta_lp - eta_f).abs() > tolerance::DUALITY_GAP
        || (sigma_lp - sigma_f).abs() > tolerance::DUALITY_GAP
    {
        return Err(Error::BoundaryCheckFailed(format!(
            "computed η* = {eta_lp}, σ* = {sigma_lp}; closed forms {eta_f}, {sigma_f}"
        )));
    }
    Ok(BoundaryHvm {
        model: HiddenVariableModel::single(h),
        alpha,
        eta_star: eta_exact,
        sigma_star: sigma_exact,
        cf,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterministicVerdict {
    pub cf: f64,
    pub sigma_prime: f64,
    /// CF exceeds σ′ by more than τ_report.
    pub genuine: bool,
}

/// Criterion for fully deterministic hidden variables with at most σ′
/// prior weight on parameter-dependent ones: contextuality is genuine iff
/// CF(e) > σ′.
pub fn deterministic_count_decomposition(
    e: &EmpiricalModel,
    sigma_prime: f64,
) -> Result<DeterministicVerdict> {
    let cf = fractions::contextual_fraction(e)?;
    deterministic_count_verdict(cf, sigma_prime)
}

pub fn deterministic_count_verdict(cf: f64, sigma_prime: f64) -> Result<DeterministicVerdict> {
    if !(0.0..=1.0).contains(&sigma_prime) {
        return Err(Error::OutOfRange { field: "sigma_prime", value: sigma_prime });
    }
    Ok(DeterministicVerdict { cf, sigma_prime, genuine: cf > sigma_prime + tolerance::REPORT })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_hvm_realizes_pr_box() {
        let hvm = catalog::chsh_table_hvm();
        assert_eq!(hvm.realized_behaviour().unwrap(), catalog::pr_box());
        let audit = hvm.audit().unwrap();
        assert_eq!(audit.eta, 0.0);
        assert!((audit.sigma - 1.0).abs() < 1e-9);
        assert!(!audit.condition_ok);
    }

    #[test]
    fn eta_star_values() {
        assert_eq!(eta_star(&catalog::pr_box()), 0.5);
        let noise = catalog::white_noise(&catalog::chsh_scenario());
        assert_eq!(eta_star(&noise), 0.75);
        assert_eq!(eta_star_by_enumeration(&noise, 1 << 20).unwrap(), 0.75);
        assert_eq!(eta_star(&catalog::chsh_signalling_vertices().0), 0.0);
    }

    #[test]
    fn enumeration_limit() {
        let e = catalog::ncycle_box(8).unwrap();
        assert!(matches!(eta_star_by_enumeration(&e, 100), Err(Error::SizeCapExceeded { .. })));
    }

    #[test]
    fn sigma_star_values() {
        let (s1, _) = catalog::chsh_signalling_vertices();
        assert!(sigma_star(&catalog::pr_box()).unwrap().abs() < 1e-9);
        assert!((sigma_star(&s1).unwrap() - 1.0).abs() < 1e-9);
        let half = EmpiricalModel::mix(&catalog::pr_box(), &s1, 0.5).unwrap();
        assert!((sigma_star(&half).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_pr_box_fails_condition() {
        let audit = HiddenVariableModel::single(catalog::pr_box()).audit().unwrap();
        assert_eq!(audit.eta, 0.5);
        assert!(!audit.condition_ok);
    }

    #[test]
    fn noncontextual_hvm_passes() {
        let s = catalog::chsh_scenario();
        let d1 = catalog::deterministic_from_global(&s, &[0, 0, 0, 0]).unwrap();
        let d2 = catalog::deterministic_from_global(&s, &[1, 0, 1, 1]).unwrap();
        let hvm =
            HiddenVariableModel::new(vec!["x".into(), "y".into()], vec![0.3, 0.7], vec![d1, d2])
                .unwrap();
        let audit = hvm.audit().unwrap();
        assert!(audit.condition_ok);
        assert!(audit.realized_cf.abs() < 1e-9);
    }

    #[test]
    fn boundary_examples() {
        let b = boundary_hvm(4, Rational64::new(1, 2)).unwrap();
        assert_eq!(b.eta_star, Rational64::new(1, 2));
        assert_eq!(b.sigma_star, Rational64::from_integer(0));
        let b = boundary_hvm(4, Rational64::new(3, 4)).unwrap();
        assert_eq!(b.eta_star, Rational64::new(1, 4));
        assert_eq!(b.sigma_star, Rational64::new(1, 2));
        assert!(matches!(boundary_hvm(4, Rational64::new(1, 3)), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(boundary_hvm(2, Rational64::new(1, 2)), Err(Error::NTooSmall(2))));
    }

    #[test]
    fn invalid_hvms() {
        let pr = catalog::pr_box();
        let err = HiddenVariableModel::new(vec!["a".into()], vec![0.9], vec![pr.clone()]);
        assert!(matches!(err, Err(Error::NormalizationViolation { .. })));
        let other = catalog::ncycle_box(5).unwrap();
        let err = HiddenVariableModel::new(vec!["a".into(), "b".into()], vec![0.5, 0.5], vec![pr, other]);
        assert_eq!(err.unwrap_err(), Error::ScenarioMismatch);
    }

    #[test]
    fn deterministic_count() {
        let q = catalog::chsh_quantum();
        assert!(!deterministic_count_decomposition(&q, 0.5).unwrap().genuine);
        assert!(deterministic_count_decomposition(&q, 0.1).unwrap().genuine);
        assert!(!deterministic_count_decomposition(&catalog::pr_box(), 1.0).unwrap().genuine);
    }
}

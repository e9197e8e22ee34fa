//! Certification of contextuality robust to unsharp and parameter-dependent
//! hidden variables: given η and σ with 2η + σ < 1, any such model obeys
//! CF ≤ η, so a measured CF above η is genuine.

use serde::Serialize;

use crate::empirical::EmpiricalModel;
use crate::error::{Error, Result};
use crate::fractions;
use crate::hvm;
use crate::tolerance;

/// How η is obtained from experimental metadata.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaEstimator {
    Manual(f64),
    /// Per-context probability that a repeated measurement flips its outcome.
    FlipProbability(Vec<f64>),
    /// Observed probabilities of the events an ideal model forbids.
    HardyZero(Vec<f64>),
    /// Single-measurement error rate ε; η = 1 − (1−ε)².
    Repeatability(f64),
    /// Theoretical versus observed probabilities, entrywise.
    MaxDeviation { theory: Vec<f64>, experiment: Vec<f64> },
    /// Conditionals p(A = o | A′ = −o) for a measurement repeated in two contexts.
    OutcomeMismatch(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub provenance: String,
}

impl Estimate {
    pub fn new(value: f64, provenance: impl Into<String>) -> Self {
        Self { value, provenance: provenance.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaPolicy {
    Zero,
    SfOfModel,
    MimOfModel,
    Manual(Option<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    GenuineContextuality,
    NotCertified,
    ConditionFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectedInequality {
    pub beta_cl: f64,
    pub beta_max: f64,
    /// β_cl + (β_max − β_cl)·η.
    pub bound: f64,
    /// Observed inequality value, when certification started from one.
    pub observed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub cf: f64,
    /// `None` when certifying a reported CF without a model.
    pub sf: Option<f64>,
    pub mim: Option<f64>,
    pub eta: Estimate,
    pub sigma: Estimate,
    /// 2η + σ.
    pub condition_value: f64,
    pub condition_holds: bool,
    pub verdict: Verdict,
    pub corrected_inequality: Option<CorrectedInequality>,
}

/// Every measure of a single model that `analyze` reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelAnalysis {
    pub cf: f64,
    pub ncf: f64,
    pub sf: f64,
    pub nsf: f64,
    pub mim: f64,
    pub nonsignalling: bool,
    pub eta_star: f64,
}

pub fn analyze(model: &EmpiricalModel) -> Result<ModelAnalysis> {
    let ncf = fractions::noncontextual_fraction(model)?.value;
    let nsf = fractions::nonsignalling_fraction(model)?.value;
    Ok(ModelAnalysis {
        cf: 1.0 - ncf,
        ncf,
        sf: 1.0 - nsf,
        nsf,
        mim: model.mim(),
        nonsignalling: model.is_nonsignalling(tolerance::PROBABILITY).nonsignalling,
        eta_star: hvm::eta_star(model),
    })
}

fn unit(field: &'static str, value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange { field, value });
    }
    Ok(value)
}

fn unit_list(field: &'static str, values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::MissingField(field));
    }
    values.iter().try_fold(0.0f64, |acc, &v| Ok(acc.max(unit(field, v)?)))
}

fn render(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn estimate_eta(estimator: &EtaEstimator) -> Result<Estimate> {
    match estimator {
        EtaEstimator::Manual(v) => {
            Ok(Estimate::new(unit("eta", *v)?, format!("manual: eta = {v}")))
        }
        EtaEstimator::FlipProbability(p) => {
            let eta = unit_list("flip_probabilities", p)?;
            Ok(Estimate::new(
                eta,
                format!("flip_probability: eta = max over contexts of {}", render(p)),
            ))
        }
        EtaEstimator::HardyZero(p) => {
            let eta = unit_list("zero_probabilities", p)?;
            Ok(Estimate::new(eta, format!("hardy_zero: eta = max of forbidden-event probabilities {}", render(p))))
        }
        EtaEstimator::Repeatability(eps) => {
            let eps = unit("epsilon", *eps)?;
            let eta = 2.0 * eps - eps * eps;
            Ok(Estimate::new(eta, format!("repeatability: eta = 2*eps - eps^2 with eps = {eps}")))
        }
        EtaEstimator::MaxDeviation { theory, experiment } => {
            if theory.is_empty() {
                return Err(Error::MissingField("theory"));
            }
            if experiment.is_empty() {
                return Err(Error::MissingField("experiment"));
            }
            if theory.len() != experiment.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} theoretical vs {} observed probabilities",
                    theory.len(),
                    experiment.len()
                )));
            }
            unit_list("theory", theory)?;
            unit_list("experiment", experiment)?;
            let eta = theory.iter().zip(experiment).map(|(t, e)| (t - e).abs()).fold(0.0, f64::max);
            Ok(Estimate::new(
                eta,
                format!("max_deviation: eta = max |p_th - p_exp| over {} entries", theory.len()),
            ))
        }
        EtaEstimator::OutcomeMismatch(p) => {
            let eta = unit_list("mismatch_probabilities", p)?;
            Ok(Estimate::new(
                eta,
                format!("outcome_mismatch: eta = max_o p(A = o | A' = -o) over {}", render(p)),
            ))
        }
    }
}

pub fn estimate_sigma(policy: SigmaPolicy, model: Option<&EmpiricalModel>) -> Result<Estimate> {
    match policy {
        SigmaPolicy::Zero => {
            Ok(Estimate::new(0.0, "zero: hidden variables assumed parameter-independent"))
        }
        SigmaPolicy::Manual(None) => Err(Error::ManualValueMissing),
        SigmaPolicy::Manual(Some(v)) => Ok(Estimate::new(unit("sigma", v)?, format!("manual: sigma = {v}"))),
        SigmaPolicy::SfOfModel => {
            let e = model.ok_or(Error::MissingField("model"))?;
            let sf = fractions::signalling_fraction(e)?;
            Ok(Estimate::new(sf, "sf_of_model: sigma = SF(e), the smallest value any realisation allows"))
        }
        SigmaPolicy::MimOfModel => {
            let e = model.ok_or(Error::MissingField("model"))?;
            Ok(Estimate::new(e.mim(), "mim_of_model: sigma = MIM(e), a lower bound on SF(e)"))
        }
    }
}

fn verdict(cf: f64, eta: f64, sigma: f64) -> (f64, bool, Verdict) {
    let condition_value = 2.0 * eta + sigma;
    let holds = condition_value < 1.0;
    let verdict = if !holds {
        Verdict::ConditionFailed
    } else if cf > eta + tolerance::REPORT {
        Verdict::GenuineContextuality
    } else {
        Verdict::NotCertified
    };
    (condition_value, holds, verdict)
}

/// Largest CF any admissible hidden-variable model can produce, i.e. η, or
/// `None` when 2η + σ ≥ 1 and no bound below 1 follows.
pub fn cf_bound(eta: &Estimate, sigma: &Estimate) -> Result<Option<f64>> {
    unit("eta", eta.value)?;
    unit("sigma", sigma.value)?;
    let (_, holds, _) = verdict(0.0, eta.value, sigma.value);
    Ok(holds.then_some(eta.value))
}

/// Computes CF, SF and MIM of `model` and compares CF with η.
pub fn certify(model: &EmpiricalModel, eta: Estimate, sigma: Estimate) -> Result<CertificationReport> {
    unit("eta", eta.value)?;
    unit("sigma", sigma.value)?;
    let cf = fractions::contextual_fraction(model)?;
    let sf = fractions::signalling_fraction(model)?;
    let mut report = certify_value(cf, eta, sigma)?;
    report.sf = Some(sf);
    report.mim = Some(model.mim());
    Ok(report)
}

/// Certification from a reported CF (no model available).
pub fn certify_value(cf: f64, eta: Estimate, sigma: Estimate) -> Result<CertificationReport> {
    unit("cf", cf)?;
    unit("eta", eta.value)?;
    unit("sigma", sigma.value)?;
    let (condition_value, condition_holds, verdict) = verdict(cf, eta.value, sigma.value);
    Ok(CertificationReport {
        cf,
        sf: None,
        mim: None,
        eta,
        sigma,
        condition_value,
        condition_holds,
        verdict,
        corrected_inequality: None,
    })
}

impl CertificationReport {
    /// Attaches the corrected classical bound of an inequality with
    /// classical bound β_cl and algebraic maximum β_max.
    pub fn with_inequality(mut self, beta_cl: f64, beta_max: f64) -> Result<Self> {
        let bound = corrected_inequality_bound(beta_cl, beta_max, self.eta.value)?;
        self.corrected_inequality = Some(CorrectedInequality { beta_cl, beta_max, bound, observed: None });
        Ok(self)
    }
}

fn check_bounds(beta_cl: f64, beta_max: f64) -> Result<()> {
    if !(beta_max > beta_cl) {
        return Err(Error::BoundsInverted { beta_cl, beta_max });
    }
    Ok(())
}

/// β_cl + (β_max − β_cl)·η: the inequality-space form of CF ≤ η.
pub fn corrected_inequality_bound(beta_cl: f64, beta_max: f64, eta: f64) -> Result<f64> {
    if beta_max < beta_cl {
        return Err(Error::BoundsInverted { beta_cl, beta_max });
    }
    Ok(beta_cl + (beta_max - beta_cl) * eta)
}

/// CF lower bound implied by an observed inequality value,
/// (β − β_cl)/(β_max − β_cl), clamped to [0, 1].
pub fn cf_from_inequality(observed: f64, beta_cl: f64, beta_max: f64) -> Result<f64> {
    check_bounds(beta_cl, beta_max)?;
    Ok(((observed - beta_cl) / (beta_max - beta_cl)).clamp(0.0, 1.0))
}

/// Certification from an observed inequality value.
pub fn certify_inequality(
    observed: f64,
    beta_cl: f64,
    beta_max: f64,
    eta: Estimate,
    sigma: Estimate,
) -> Result<CertificationReport> {
    let cf = cf_from_inequality(observed, beta_cl, beta_max)?;
    let mut report = certify_value(cf, eta, sigma)?.with_inequality(beta_cl, beta_max)?;
    if let Some(c) = report.corrected_inequality.as_mut() {
        c.observed = Some(observed);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WinterComparison {
    /// Σ ω_i(k_i − 1)/(β_max − β_cl)·ε.
    pub winter_bound: f64,
    /// CF ≤ η with η = ε.
    pub our_bound: f64,
    /// ε at which the cited bound reaches 1.
    pub winter_saturation: f64,
}

pub fn compare_winter_bound(
    weights: &[f64],
    degrees: &[u32],
    beta_cl: f64,
    beta_max: f64,
    epsilon: f64,
) -> Result<WinterComparison> {
    check_bounds(beta_cl, beta_max)?;
    if weights.len() != degrees.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for {} degrees",
            weights.len(),
            degrees.len()
        )));
    }
    let epsilon = unit("epsilon", epsilon)?;
    let factor: f64 = weights
        .iter()
        .zip(degrees)
        .map(|(w, &k)| w * f64::from(k.saturating_sub(1)))
        .sum::<f64>()
        / (beta_max - beta_cl);
    let winter_saturation = if factor > 0.0 { (1.0 / factor).min(1.0) } else { 1.0 };
    Ok(WinterComparison { winter_bound: factor * epsilon, our_bound: epsilon, winter_saturation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn est(v: f64) -> Estimate {
        Estimate::new(v, "test")
    }

    #[test]
    fn estimators() {
        let wang = estimate_eta(&EtaEstimator::Repeatability(0.03)).unwrap();
        assert!((wang.value - 0.0591).abs() < 1e-15);
        assert_eq!(estimate_eta(&EtaEstimator::HardyZero(vec![0.01, 0.021, 0.004])).unwrap().value, 0.021);
        let dev = EtaEstimator::MaxDeviation { theory: vec![0.5, 0.25], experiment: vec![0.49, 0.255] };
        assert!((estimate_eta(&dev).unwrap().value - 0.01).abs() < 1e-12);
        assert!(matches!(estimate_eta(&EtaEstimator::FlipProbability(vec![])), Err(Error::MissingField(_))));
        assert!(matches!(estimate_eta(&EtaEstimator::Manual(1.5)), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn sigma_policies() {
        assert_eq!(estimate_sigma(SigmaPolicy::Zero, None).unwrap().value, 0.0);
        assert_eq!(estimate_sigma(SigmaPolicy::Manual(Some(0.001)), None).unwrap().value, 0.001);
        assert_eq!(estimate_sigma(SigmaPolicy::Manual(None), None).unwrap_err(), Error::ManualValueMissing);
        let pr = catalog::pr_box();
        assert!(estimate_sigma(SigmaPolicy::SfOfModel, Some(&pr)).unwrap().value.abs() < 1e-9);
        assert_eq!(estimate_sigma(SigmaPolicy::SfOfModel, None).unwrap_err(), Error::MissingField("model"));
    }

    #[test]
    fn verdicts() {
        let r = certify_value(0.89, est(0.01), est(0.001)).unwrap();
        assert_eq!(r.verdict, Verdict::GenuineContextuality);
        assert!((r.condition_value - 0.021).abs() < 1e-15);
        assert_eq!(certify_value(0.9, est(0.5), est(0.2)).unwrap().verdict, Verdict::ConditionFailed);
        let pr = certify(&catalog::pr_box(), est(0.5), est(0.0)).unwrap();
        assert_eq!(pr.verdict, Verdict::ConditionFailed);
        assert_eq!(certify_value(0.05, est(0.06), est(0.0)).unwrap().verdict, Verdict::NotCertified);
    }

    #[test]
    fn corrected_bounds() {
        assert!((corrected_inequality_bound(2.0, 4.0, 0.06).unwrap() - 2.12).abs() < 1e-12);
        assert_eq!(corrected_inequality_bound(2.0, 4.0, 0.0).unwrap(), 2.0);
        assert!(matches!(corrected_inequality_bound(4.0, 2.0, 0.1), Err(Error::BoundsInverted { .. })));
        let r = certify_inequality(2.526, 2.0, 4.0, est(0.06), est(0.0)).unwrap();
        assert_eq!(r.verdict, Verdict::GenuineContextuality);
        assert!((r.cf - 0.263).abs() < 1e-12);
    }

    #[test]
    fn winter_comparison() {
        let c = compare_winter_bound(&[1.0; 4], &[2; 4], 2.0, 4.0, 0.1).unwrap();
        assert!((c.winter_bound - 0.2).abs() < 1e-15);
        assert_eq!(c.our_bound, 0.1);
        let zero = compare_winter_bound(&[1.0; 4], &[2; 4], 2.0, 4.0, 0.0).unwrap();
        assert_eq!((zero.winter_bound, zero.our_bound), (0.0, 0.0));
        assert!(compare_winter_bound(&[1.0], &[2, 2], 2.0, 4.0, 0.1).is_err());
    }
}

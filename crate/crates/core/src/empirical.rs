//! Empirical models (behaviours): one probability table per context.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::MeasurementScenario;
use crate::tolerance;

/// How [`EmpiricalModel`] construction treats context sums that are not 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Reject any context whose sum deviates from 1 by more than τ_p.
    #[default]
    Strict,
    /// Rescale each context to sum to 1 and record the correction.
    Renormalize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel {
    scenario: Arc<MeasurementScenario>,
    tables: Vec<Vec<f64>>,
    /// `1 - sum` before renormalisation, per context (zero in strict mode).
    adjustments: Vec<f64>,
}

/// Largest marginal disagreement found between two overlapping contexts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub contexts: (usize, usize),
    /// Joint outcome on the intersection (outcome indices, canonical order).
    pub outcome: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignallingCheck {
    pub nonsignalling: bool,
    pub max_discrepancy: f64,
    pub worst: Option<Discrepancy>,
}

impl EmpiricalModel {
    pub fn new(scenario: Arc<MeasurementScenario>, tables: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_normalization(scenario, tables, Normalization::Strict)
    }

    pub fn with_normalization(
        scenario: Arc<MeasurementScenario>,
        mut tables: Vec<Vec<f64>>,
        mode: Normalization,
    ) -> Result<Self> {
        if tables.len() != scenario.context_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} tables for {} contexts",
                tables.len(),
                scenario.context_count()
            )));
        }
        let mut adjustments = vec![0.0; tables.len()];
        for (k, table) in tables.iter_mut().enumerate() {
            if table.len() != scenario.context_size(k) {
                return Err(Error::ShapeMismatch(format!(
                    "context #{k} has {} entries, expected {}",
                    table.len(),
                    scenario.context_size(k)
                )));
            }
            for (entry, p) in table.iter_mut().enumerate() {
                if !p.is_finite() || *p < -tolerance::PROBABILITY {
                    return Err(Error::NegativeProbability { context: k, entry, value: *p });
                }
                if *p < 0.0 {
                    *p = 0.0;
                }
            }
            let sum: f64 = table.iter().sum();
            match mode {
                Normalization::Strict => {
                    if (sum - 1.0).abs() > tolerance::PROBABILITY {
                        return Err(Error::NormalizationViolation { context: k, sum });
                    }
                }
                Normalization::Renormalize => {
                    if sum <= 0.0 {
                        return Err(Error::NormalizationViolation { context: k, sum });
                    }
                    if sum != 1.0 {
                        table.iter_mut().for_each(|p| *p /= sum);
                        adjustments[k] = 1.0 - sum;
                    }
                }
            }
        }
        Ok(Self { scenario, tables, adjustments })
    }

    /// Builds a model from a flat vector v^e indexed by local assignment.
    pub fn from_flat(
        scenario: Arc<MeasurementScenario>,
        flat: &[f64],
        mode: Normalization,
    ) -> Result<Self> {
        if flat.len() != scenario.local_count() {
            return Err(Error::ShapeMismatch(format!(
                "flat vector has {} entries, expected {}",
                flat.len(),
                scenario.local_count()
            )));
        }
        let tables =
            (0..scenario.context_count()).map(|k| flat[scenario.context_range(k)].to_vec()).collect();
        Self::with_normalization(scenario, tables, mode)
    }

    pub fn scenario(&self) -> &Arc<MeasurementScenario> {
        &self.scenario
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn table(&self, k: usize) -> &[f64] {
        &self.tables[k]
    }

    pub fn adjustments(&self) -> &[f64] {
        &self.adjustments
    }

    /// The flattened vector v^e.
    pub fn flat(&self) -> Vec<f64> {
        self.tables.iter().flatten().copied().collect()
    }

    fn same_scenario(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.scenario, &other.scenario) || self.scenario == other.scenario
    }

    /// Marginal of context `k` onto `subset` (measurement indices), indexed
    /// mixed-radix in the order `subset` is given.
    pub fn marginalize(&self, k: usize, subset: &[usize]) -> Result<Vec<f64>> {
        let scenario = &self.scenario;
        let ctx = scenario.context(k);
        let positions: Vec<usize> = subset
            .iter()
            .map(|x| ctx.iter().position(|c| c == x).ok_or(Error::NotASubset { context: k }))
            .collect::<Result<_>>()?;
        let size: usize = subset.iter().map(|&x| scenario.outcome_count(x)).product();
        let mut out = vec![0.0; size];
        for (joint, &p) in self.tables[k].iter().enumerate() {
            let s = scenario.decode_joint(ctx, joint);
            let t: Vec<usize> = positions.iter().map(|&i| s[i]).collect();
            out[scenario.encode_joint(subset, &t)] += p;
        }
        Ok(out)
    }

    /// Same as [`marginalize`](Self::marginalize) with measurement labels.
    pub fn marginalize_labels(&self, k: usize, subset: &[&str]) -> Result<Vec<f64>> {
        let idx: Vec<usize> = subset
            .iter()
            .map(|l| self.scenario.measurement_index(l).ok_or(Error::NotASubset { context: k }))
            .collect::<Result<_>>()?;
        self.marginalize(k, &idx)
    }

    fn worst_discrepancy(&self) -> Option<Discrepancy> {
        let s = &self.scenario;
        let mut worst: Option<Discrepancy> = None;
        for a in 0..s.context_count() {
            for b in a + 1..s.context_count() {
                let shared = s.intersection(a, b);
                if shared.is_empty() {
                    continue;
                }
                let ma = self.marginalize(a, &shared).expect("intersection is a subset");
                let mb = self.marginalize(b, &shared).expect("intersection is a subset");
                for (t, (x, y)) in ma.iter().zip(&mb).enumerate() {
                    let value = (x - y).abs();
                    if worst.as_ref().is_none_or(|w| value > w.value) {
                        worst = Some(Discrepancy {
                            contexts: (a, b),
                            outcome: s.decode_joint(&shared, t),
                            value,
                        });
                    }
                }
            }
        }
        worst
    }

    pub fn is_nonsignalling(&self, tolerance: f64) -> SignallingCheck {
        let worst = self.worst_discrepancy();
        let max_discrepancy = worst.as_ref().map_or(0.0, |w| w.value);
        SignallingCheck { nonsignalling: max_discrepancy <= tolerance, max_discrepancy, worst }
    }

    /// Maximum incompatibility of marginals over pairs of overlapping contexts.
    pub fn mim(&self) -> f64 {
        self.worst_discrepancy().map_or(0.0, |w| w.value)
    }

    /// V(e, e′) = max over contexts of the total variation distance.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if !self.same_scenario(other) {
            return Err(Error::ScenarioMismatch);
        }
        Ok(self
            .tables
            .iter()
            .zip(&other.tables)
            .map(|(p, q)| 0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max))
    }

    /// λ·e1 + (1−λ)·e2, context by context.
    pub fn mix(e1: &Self, e2: &Self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::LambdaOutOfRange(lambda));
        }
        if !e1.same_scenario(e2) {
            return Err(Error::ScenarioMismatch);
        }
        let tables = e1
            .tables
            .iter()
            .zip(&e2.tables)
            .map(|(p, q)| p.iter().zip(q).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect())
            .collect();
        Ok(Self {
            scenario: e1.scenario.clone(),
            tables,
            adjustments: vec![0.0; e1.tables.len()],
        })
    }

    /// Moves at most ε of mass per context towards a seeded random
    /// distribution, so that V(e, e′) ≤ ε.
    pub fn perturb(&self, epsilon: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::OutOfRange { field: "epsilon", value: epsilon });
        }
        if epsilon == 0.0 {
            return Ok(self.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables = self
            .tables
            .iter()
            .map(|p| {
                let target = dirichlet(&mut rng, p.len());
                p.iter().zip(&target).map(|(a, q)| (1.0 - epsilon) * a + epsilon * q).collect()
            })
            .collect();
        Ok(Self { scenario: self.scenario.clone(), tables, adjustments: self.adjustments.clone() })
    }
}

/// Symmetric Dirichlet(1) sample of dimension `k`.
pub(crate) fn dirichlet<R: rand::Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    const P1: f64 = 0.426_776_695_296_636_9; // (2+√2)/8
    const P2: f64 = 0.073_223_304_703_363_1; // (2−√2)/8

    #[test]
    fn chsh_quantum_and_pr_box_are_valid() {
        let s = catalog::chsh_scenario();
        let q = vec![vec![P1, P2, P2, P1]; 3].into_iter().chain([vec![P2, P1, P1, P2]]).collect();
        assert!(EmpiricalModel::new(s.clone(), q).is_ok());
        let pr = vec![vec![0.5, 0.0, 0.0, 0.5]; 3].into_iter().chain([vec![0.0, 0.5, 0.5, 0.0]]);
        assert!(EmpiricalModel::new(s, pr.collect()).is_ok());
    }

    #[test]
    fn strict_mode_rejects_bad_sums_and_renormalize_records_them() {
        let s = catalog::chsh_scenario();
        let mut tables = vec![vec![0.25; 4]; 4];
        tables[2] = vec![0.2; 4];
        let err = EmpiricalModel::new(s.clone(), tables.clone()).unwrap_err();
        assert!(matches!(err, Error::NormalizationViolation { context: 2, .. }));
        let e = EmpiricalModel::with_normalization(s, tables, Normalization::Renormalize).unwrap();
        assert!((e.adjustments()[2] - 0.2).abs() < 1e-15);
        assert_eq!(e.table(2), &[0.25; 4]);
    }

    #[test]
    fn rejects_negative_and_misshapen_tables() {
        let s = catalog::chsh_scenario();
        let mut tables = vec![vec![0.25; 4]; 4];
        tables[0] = vec![0.5, 0.5, 0.1, -0.1];
        assert!(matches!(
            EmpiricalModel::new(s.clone(), tables),
            Err(Error::NegativeProbability { context: 0, entry: 3, .. })
        ));
        assert!(matches!(
            EmpiricalModel::new(s.clone(), vec![vec![0.25; 4]; 3]),
            Err(Error::ShapeMismatch(_))
        ));
        let mut short = vec![vec![0.25; 4]; 4];
        short[1] = vec![0.5, 0.5];
        assert!(matches!(EmpiricalModel::new(s, short), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn marginals() {
        let pr = catalog::pr_box();
        assert_eq!(pr.marginalize_labels(0, &["a"]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(pr.marginalize_labels(0, &["a", "b"]).unwrap(), pr.table(0));
        assert!(matches!(pr.marginalize_labels(0, &["a'"]), Err(Error::NotASubset { .. })));

        let s = catalog::chsh_scenario();
        let delta = catalog::deterministic_vertex(&s, &[0, 0, 0, 0]).unwrap();
        assert_eq!(delta.marginalize_labels(0, &["b"]).unwrap(), vec![1.0, 0.0]);
        // reversed subset order reorders the marginal index
        let e = catalog::chsh_quantum();
        let ab = e.marginalize_labels(3, &["a'", "b'"]).unwrap();
        let ba = e.marginalize_labels(3, &["b'", "a'"]).unwrap();
        assert_eq!(ab, vec![ba[0], ba[2], ba[1], ba[3]]);
    }

    #[test]
    fn nonsignalling_checks() {
        let pr = catalog::pr_box();
        let check = pr.is_nonsignalling(0.0);
        assert!(check.nonsignalling);
        assert_eq!(check.max_discrepancy, 0.0);

        let (s1, _) = catalog::chsh_signalling_vertices();
        let check = s1.is_nonsignalling(1e-9);
        assert!(!check.nonsignalling);
        assert_eq!(check.max_discrepancy, 1.0);
        assert!(check.worst.is_some());

        let disjoint = MeasurementScenario::new(
            &["x", "y"],
            &[vec!["x"], vec!["y"]],
            &[("x", vec!["0", "1"]), ("y", vec!["0", "1"])],
        )
        .unwrap();
        let e = EmpiricalModel::new(Arc::new(disjoint), vec![vec![1.0, 0.0], vec![0.3, 0.7]])
            .unwrap();
        assert!(e.is_nonsignalling(0.0).nonsignalling);
        assert!(e.is_nonsignalling(0.0).worst.is_none());
    }

    #[test]
    fn mim_values() {
        assert_eq!(catalog::mim_counterexample().mim(), 0.2821);
        assert_eq!(catalog::pr_box().mim(), 0.0);
        assert_eq!(catalog::chsh_quantum().mim(), 0.0);
        assert_eq!(catalog::chsh_signalling_vertices().0.mim(), 1.0);
    }

    #[test]
    fn total_variation_values() {
        let pr = catalog::pr_box();
        let q = catalog::chsh_quantum();
        assert_eq!(pr.total_variation(&pr).unwrap(), 0.0);
        let expected = (2.0 - 2f64.sqrt()) / 4.0;
        assert!((pr.total_variation(&q).unwrap() - expected).abs() < 1e-15);

        let one = Arc::new(
            MeasurementScenario::new(&["x"], &[vec!["x"]], &[("x", vec!["0", "1"])]).unwrap(),
        );
        let d0 = EmpiricalModel::new(one.clone(), vec![vec![1.0, 0.0]]).unwrap();
        let d1 = EmpiricalModel::new(one.clone(), vec![vec![0.0, 1.0]]).unwrap();
        assert_eq!(d0.total_variation(&d1).unwrap(), 1.0);
        assert_eq!(d0.total_variation(&pr), Err(Error::ScenarioMismatch));
    }

    #[test]
    fn mixing() {
        let pr = catalog::pr_box();
        let noise = catalog::white_noise(pr.scenario());
        let half = EmpiricalModel::mix(&pr, &noise, 0.5).unwrap();
        for k in 0..3 {
            assert_eq!(half.table(k), &[0.375, 0.125, 0.125, 0.375]);
        }
        assert_eq!(EmpiricalModel::mix(&pr, &pr, 0.3).unwrap().tables(), pr.tables());
        assert_eq!(EmpiricalModel::mix(&pr, &noise, 0.0).unwrap().tables(), noise.tables());
        assert_eq!(EmpiricalModel::mix(&pr, &noise, 1.5), Err(Error::LambdaOutOfRange(1.5)));
        let other = catalog::white_noise(&catalog::ncycle_scenario(5).unwrap());
        assert_eq!(EmpiricalModel::mix(&pr, &other, 0.5), Err(Error::ScenarioMismatch));
    }

    #[test]
    fn perturbation() {
        let pr = catalog::pr_box();
        assert_eq!(pr.perturb(0.0, 7).unwrap(), pr);
        let a = pr.perturb(0.01, 1).unwrap();
        let b = pr.perturb(0.01, 1).unwrap();
        assert_eq!(a, b);
        assert!(pr.total_variation(&a).unwrap() <= 0.01);
        assert_ne!(pr.perturb(0.01, 2).unwrap(), a);
        for (k, t) in a.tables().iter().enumerate() {
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12, "context {k}");
        }
    }
}

//! Canonical scenarios and behaviours: the CHSH tables, PR-box, n-cycle
//! boxes and their signalling vertices, the MIM counterexample, noise
//! baselines, deterministic vertices and seeded random models.

use std::sync::Arc;

use num_rational::BigRational;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::empirical::{dirichlet, EmpiricalModel, Normalization};
use crate::error::{Error, Result};
use crate::hvm::HiddenVariableModel;
use crate::scenario::MeasurementScenario;

/// Rational approximation of √2 used by the exact backend; |r − √2| < 3·10⁻¹³.
pub const SQRT2_NUMER: i64 = 1_607_521;
pub const SQRT2_DENOM: i64 = 1_136_689;

const BINARY: [&str; 2] = ["0", "1"];

/// The (2,2,2) Bell scenario: measurements a, a′ (left) and b, b′ (right).
pub fn chsh_scenario() -> Arc<MeasurementScenario> {
    let measurements = ["a", "a'", "b", "b'"];
    let contexts = [
        vec!["a", "b"],
        vec!["a", "b'"],
        vec!["a'", "b"],
        vec!["a'", "b'"],
    ];
    let outcomes: Vec<(&str, Vec<&str>)> =
        measurements.iter().map(|m| (*m, BINARY.to_vec())).collect();
    Arc::new(
        MeasurementScenario::new(&measurements, &contexts, &outcomes)
            .expect("CHSH scenario is well formed"),
    )
}

fn chsh_table(correlated: [f64; 2]) -> Vec<Vec<f64>> {
    let [p, q] = correlated;
    let same = vec![p, q, q, p];
    let flipped = vec![q, p, p, q];
    vec![same.clone(), same.clone(), same, flipped]
}

fn build(scenario: Arc<MeasurementScenario>, tables: Vec<Vec<f64>>) -> EmpiricalModel {
    EmpiricalModel::new(scenario, tables).expect("catalog table is a valid model")
}

/// Tsirelson-optimal quantum CHSH table: p1 = (2+√2)/8, p2 = (2−√2)/8.
pub fn chsh_quantum() -> EmpiricalModel {
    let s2 = std::f64::consts::SQRT_2;
    build(chsh_scenario(), chsh_table([(2.0 + s2) / 8.0, (2.0 - s2) / 8.0]))
}

/// Exact flat vector of the quantum CHSH table with √2 replaced by
/// [`SQRT2_NUMER`]/[`SQRT2_DENOM`].
pub fn chsh_quantum_exact() -> Vec<BigRational> {
    let r = sqrt2_rational();
    let two = BigRational::from_integer(BigInt::from(2));
    let eight = BigRational::from_integer(BigInt::from(8));
    let p1 = (two.clone() + r.clone()) / eight.clone();
    let p2 = (two - r) / eight;
    let same = [p1.clone(), p2.clone(), p2.clone(), p1.clone()];
    let flipped = [p2.clone(), p1.clone(), p1, p2];
    same.iter().chain(&same).chain(&same).chain(&flipped).cloned().collect()
}

pub fn sqrt2_rational() -> BigRational {
    BigRational::new(BigInt::from(SQRT2_NUMER), BigInt::from(SQRT2_DENOM))
}

pub fn pr_box() -> EmpiricalModel {
    build(chsh_scenario(), chsh_table([0.5, 0.0]))
}

/// The two deterministic, parameter-dependent behaviours whose equal mixture
/// is the PR-box.
pub fn chsh_signalling_vertices() -> (EmpiricalModel, EmpiricalModel) {
    let s = chsh_scenario();
    let h1 = deterministic_vertex(&s, &[0, 0, 0, 1]).expect("valid choice");
    let h2 = deterministic_vertex(&s, &[3, 3, 3, 2]).expect("valid choice");
    (h1, h2)
}

/// Hidden-variable model with prior (½, ½) over [`chsh_signalling_vertices`].
pub fn chsh_table_hvm() -> HiddenVariableModel {
    let (h1, h2) = chsh_signalling_vertices();
    HiddenVariableModel::new(vec!["l1".into(), "l2".into()], vec![0.5, 0.5], vec![h1, h2])
        .expect("valid HVM")
}

/// n-cycle: measurements A1..An, contexts {A_i, A_(i+1 mod n)}, binary outcomes.
pub fn ncycle_scenario(n: usize) -> Result<Arc<MeasurementScenario>> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    let labels: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
    let contexts: Vec<Vec<String>> =
        (0..n).map(|i| vec![labels[i].clone(), labels[(i + 1) % n].clone()]).collect();
    let outcomes: Vec<(String, Vec<String>)> = labels
        .iter()
        .map(|l| (l.clone(), BINARY.iter().map(|s| s.to_string()).collect()))
        .collect();
    Ok(Arc::new(MeasurementScenario::new(&labels, &contexts, &outcomes)?))
}

/// h_S1 assigns 00 on contexts 0..n−2 and 01 on the wrap context;
/// h_S2 is its global bit-flip.
pub fn ncycle_vertices(n: usize) -> Result<(EmpiricalModel, EmpiricalModel)> {
    let s = ncycle_scenario(n)?;
    let mut c1 = vec![0usize; n];
    c1[n - 1] = 1;
    let c2: Vec<usize> = c1.iter().map(|&j| 3 - j).collect();
    Ok((deterministic_vertex(&s, &c1)?, deterministic_vertex(&s, &c2)?))
}

/// ½·h_S1 + ½·h_S2: non-signalling with CF = 1.
pub fn ncycle_box(n: usize) -> Result<EmpiricalModel> {
    let (h1, h2) = ncycle_vertices(n)?;
    EmpiricalModel::mix(&h1, &h2, 0.5)
}

/// The four-context table with MIM = 0.2821. Its last row sums to 0.9999 as
/// printed, so it is renormalised.
pub fn mim_counterexample() -> EmpiricalModel {
    let labels = ["a1", "a2", "b1", "b2"];
    let contexts = [
        vec!["a1", "b1"],
        vec!["a1", "b2"],
        vec!["a2", "b1"],
        vec!["a2", "b2"],
    ];
    let outcomes: Vec<(&str, Vec<&str>)> = labels.iter().map(|m| (*m, BINARY.to_vec())).collect();
    let scenario = Arc::new(
        MeasurementScenario::new(&labels, &contexts, &outcomes).expect("well formed"),
    );
    let tables = vec![
        vec![0.0, 0.0, 0.0, 1.0],
        vec![0.2821, 0.0, 0.0674, 0.6505],
        vec![0.2821, 0.0674, 0.0, 0.6505],
        vec![0.0821, 0.4589, 0.4589, 0.0],
    ];
    EmpiricalModel::with_normalization(scenario, tables, Normalization::Renormalize)
        .expect("valid after renormalisation")
}

/// Uniform distribution on every context.
pub fn white_noise(scenario: &Arc<MeasurementScenario>) -> EmpiricalModel {
    let tables = (0..scenario.context_count())
        .map(|k| {
            let size = scenario.context_size(k);
            vec![1.0 / size as f64; size]
        })
        .collect();
    build(scenario.clone(), tables)
}

/// Dirac distribution on `choice[k]` (a joint-outcome index) in context k.
/// Choices need not agree on overlaps; inconsistent ones are signalling.
pub fn deterministic_vertex(
    scenario: &Arc<MeasurementScenario>,
    choice: &[usize],
) -> Result<EmpiricalModel> {
    if choice.len() != scenario.context_count() {
        return Err(Error::BadOutcomeChoice(format!(
            "{} choices for {} contexts",
            choice.len(),
            scenario.context_count()
        )));
    }
    let mut tables = Vec::with_capacity(choice.len());
    for (k, &j) in choice.iter().enumerate() {
        let size = scenario.context_size(k);
        if j >= size {
            return Err(Error::BadOutcomeChoice(format!(
                "context #{k} has {size} joint outcomes, got index {j}"
            )));
        }
        let mut table = vec![0.0; size];
        table[j] = 1.0;
        tables.push(table);
    }
    EmpiricalModel::new(scenario.clone(), tables)
}

/// Noncontextual vertex induced by a global assignment (outcome index per
/// measurement, canonical order).
pub fn deterministic_from_global(
    scenario: &Arc<MeasurementScenario>,
    assignment: &[usize],
) -> Result<EmpiricalModel> {
    let count = scenario.measurements().len();
    if assignment.len() != count
        || assignment.iter().enumerate().any(|(x, &o)| o >= scenario.outcome_count(x))
    {
        return Err(Error::BadOutcomeChoice(format!(
            "global assignment {assignment:?} does not fit {count} measurements"
        )));
    }
    let choice: Vec<usize> =
        (0..scenario.context_count()).map(|k| scenario.restrict(assignment, k)).collect();
    deterministic_vertex(scenario, &choice)
}

/// Independent Dirichlet(1) table per context; generally signalling.
pub fn random_model(scenario: &Arc<MeasurementScenario>, seed: u64) -> EmpiricalModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_model_with(scenario, &mut rng)
}

pub fn random_model_with<R: Rng>(scenario: &Arc<MeasurementScenario>, rng: &mut R) -> EmpiricalModel {
    let tables =
        (0..scenario.context_count()).map(|k| dirichlet(rng, scenario.context_size(k))).collect();
    EmpiricalModel::with_normalization(scenario.clone(), tables, Normalization::Renormalize)
        .expect("Dirichlet tables are valid")
}

/// Random convex mixture of `terms` noncontextual vertices.
pub fn random_noncontextual<R: Rng>(
    scenario: &Arc<MeasurementScenario>,
    terms: usize,
    rng: &mut R,
) -> EmpiricalModel {
    let weights = dirichlet(rng, terms.max(1));
    let globals = scenario.global_count();
    let mut flat = vec![0.0; scenario.local_count()];
    for w in weights {
        let g = rng.gen_range(0..globals);
        let assignment = scenario.decode_global(g);
        for k in 0..scenario.context_count() {
            let idx = scenario.context_range(k).start + scenario.restrict(&assignment, k);
            flat[idx] += w;
        }
    }
    EmpiricalModel::from_flat(scenario.clone(), &flat, Normalization::Renormalize)
        .expect("mixture of vertices is valid")
}

/// λ·box + (1−λ)·d with d the all-zero global assignment, which saturates
/// the box's optimal inequality, so CF = λ.
fn box_with_vertex(boxed: EmpiricalModel, lambda: f64) -> Result<EmpiricalModel> {
    let s = boxed.scenario().clone();
    let zero = deterministic_from_global(&s, &vec![0; s.measurements().len()])?;
    EmpiricalModel::mix(&boxed, &zero, lambda)
}

/// CHSH stand-in with CF = 0.89.
pub fn hu_standin() -> EmpiricalModel {
    box_with_vertex(pr_box(), 0.89).expect("valid mixture")
}

/// 5-cycle stand-in with CF = 0.16.
pub fn marques_standin() -> EmpiricalModel {
    box_with_vertex(ncycle_box(5).expect("n = 5"), 0.16).expect("valid mixture")
}

/// CHSH stand-in with CF = 0.263, i.e. CHSH value 2 + 2·0.263 = 2.526.
pub fn wang_standin() -> EmpiricalModel {
    box_with_vertex(pr_box(), 0.263).expect("valid mixture")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedMetric {
    pub metric: &'static str,
    pub value: f64,
    pub provenance: &'static str,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Params {
    pub n: Option<usize>,
    pub lambda: Option<f64>,
}

pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    builder: fn(&Params) -> Result<EmpiricalModel>,
    expected: fn(&Params) -> Vec<ExpectedMetric>,
}

impl CatalogEntry {
    pub fn build(&self, params: &Params) -> Result<EmpiricalModel> {
        (self.builder)(params)
    }

    /// Reference values, keyed by metric name (`cf`, `sf`, `mim`, `eta_star`).
    pub fn expected_metrics(&self, params: &Params) -> Vec<ExpectedMetric> {
        (self.expected)(params)
    }
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry").field("name", &self.name).finish()
    }
}

fn metric(metric: &'static str, value: f64, provenance: &'static str) -> ExpectedMetric {
    ExpectedMetric { metric, value, provenance }
}

fn cycle_n(p: &Params) -> usize {
    p.n.unwrap_or(5)
}

fn lambda_or(p: &Params, default: f64) -> Result<f64> {
    let l = p.lambda.unwrap_or(default);
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::LambdaOutOfRange(l));
    }
    Ok(l)
}

const PR_METRICS: fn(&Params) -> Vec<ExpectedMetric> = |_| {
    vec![
        metric("cf", 1.0, "strongly contextual box"),
        metric("sf", 0.0, "non-signalling"),
        metric("mim", 0.0, "non-signalling"),
        metric("eta_star", 0.5, "every context splits ½/½"),
    ]
};

static ENTRIES: [CatalogEntry; 10] = [
    CatalogEntry {
        name: "pr-box",
        description: "PR-box on the CHSH scenario",
        builder: |_| Ok(pr_box()),
        expected: PR_METRICS,
    },
    CatalogEntry {
        name: "chsh-quantum",
        description: "Tsirelson-optimal quantum CHSH table",
        builder: |_| Ok(chsh_quantum()),
        expected: |_| {
            vec![
                metric("cf", std::f64::consts::SQRT_2 - 1.0, "exact LP: √2 − 1"),
                metric("sf", 0.0, "non-signalling"),
                metric("mim", 0.0, "non-signalling"),
                metric("eta_star", 1.0 - (2.0 + std::f64::consts::SQRT_2) / 8.0, "1 − p1"),
            ]
        },
    },
    CatalogEntry {
        name: "mim-counterexample",
        description: "four-context signalling table with MIM 0.2821",
        builder: |_| Ok(mim_counterexample()),
        expected: |_| {
            vec![
                metric("mim", 0.2821, "largest marginal gap, exact in f64"),
                metric("sf", 0.8652, "LP with explicit NS witness of weight 0.1348"),
                metric("eta_star", 1.0 - 0.4589 / 0.9999, "1 − max entry of the renormalised (a2,b2) row"),
            ]
        },
    },
    CatalogEntry {
        name: "chsh-hvm-1",
        description: "deterministic signalling behaviour h1 of the PR-box HVM",
        builder: |_| Ok(chsh_signalling_vertices().0),
        expected: |_| {
            vec![
                metric("cf", 1.0, "NCF ≤ NSF = 0"),
                metric("sf", 1.0, "MIM = 1 forces SF = 1"),
                metric("mim", 1.0, "marginal of a′ differs across contexts"),
                metric("eta_star", 0.0, "deterministic"),
            ]
        },
    },
    CatalogEntry {
        name: "chsh-hvm-2",
        description: "deterministic signalling behaviour h2 of the PR-box HVM",
        builder: |_| Ok(chsh_signalling_vertices().1),
        expected: |_| {
            vec![
                metric("cf", 1.0, "NCF ≤ NSF = 0"),
                metric("sf", 1.0, "MIM = 1 forces SF = 1"),
                metric("eta_star", 0.0, "deterministic"),
            ]
        },
    },
    CatalogEntry {
        name: "white-noise",
        description: "uniform tables on the CHSH scenario (n-cycle with --n)",
        builder: |p| match p.n {
            None => Ok(white_noise(&chsh_scenario())),
            Some(n) => Ok(white_noise(&ncycle_scenario(n)?)),
        },
        expected: |_| {
            vec![
                metric("cf", 0.0, "uniform mixture of all global assignments"),
                metric("sf", 0.0, "non-signalling"),
                metric("eta_star", 0.75, "1 − ¼"),
            ]
        },
    },
    CatalogEntry {
        name: "ncycle-box",
        description: "maximally contextual n-cycle box (default n = 5)",
        builder: |p| ncycle_box(cycle_n(p)),
        expected: PR_METRICS,
    },
    CatalogEntry {
        name: "hu-standin",
        description: "CHSH mixture 0.89·PR + 0.11·vertex, CF 0.89",
        builder: |p| box_with_vertex(pr_box(), lambda_or(p, 0.89)?),
        expected: |p| match p.lambda {
            None => vec![metric("cf", 0.89, "weight of the box")],
            Some(_) => Vec::new(),
        },
    },
    CatalogEntry {
        name: "marques-standin",
        description: "5-cycle mixture 0.16·box + 0.84·vertex, CF 0.16",
        builder: |p| box_with_vertex(ncycle_box(5)?, lambda_or(p, 0.16)?),
        expected: |p| match p.lambda {
            None => vec![metric("cf", 0.16, "weight of the box")],
            Some(_) => Vec::new(),
        },
    },
    CatalogEntry {
        name: "wang-standin",
        description: "CHSH mixture with CHSH value 2.526, CF 0.263",
        builder: |p| box_with_vertex(pr_box(), lambda_or(p, 0.263)?),
        expected: |p| match p.lambda {
            None => vec![metric("cf", 0.263, "(2.526 − 2)/(4 − 2)")],
            Some(_) => Vec::new(),
        },
    },
];

pub fn entries() -> &'static [CatalogEntry] {
    &ENTRIES
}

pub fn entry(name: &str) -> Result<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = ENTRIES.iter().map(|e| e.name).collect();
        Error::InvalidInput(format!("unknown catalog entry '{name}' (known: {})", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_quantum_first_context() {
        let q = chsh_quantum();
        let p1 = (2.0 + 2f64.sqrt()) / 8.0;
        let p2 = (2.0 - 2f64.sqrt()) / 8.0;
        assert_eq!(q.table(0), &[p1, p2, p2, p1]);
        assert_eq!(q.table(3), &[p2, p1, p1, p2]);
    }

    #[test]
    fn pr_box_rows() {
        let pr = pr_box();
        assert_eq!(pr.table(3), &[0.0, 0.5, 0.5, 0.0]);
        assert!(pr.is_nonsignalling(1e-12).nonsignalling);
    }

    #[test]
    fn signalling_vertices_match_printed_tables() {
        let (h1, h2) = chsh_signalling_vertices();
        assert_eq!(h1.table(0), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(h1.table(3), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(h2.table(2), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(h2.table(3), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn four_cycle_vertices_follow_the_printed_pattern() {
        let (h1, h2) = ncycle_vertices(4).unwrap();
        for k in 0..3 {
            assert_eq!(h1.table(k), &[1.0, 0.0, 0.0, 0.0]);
            assert_eq!(h2.table(k), &[0.0, 0.0, 0.0, 1.0]);
        }
        assert_eq!(h1.table(3), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(h2.table(3), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn ncycle_boxes_are_nonsignalling() {
        for n in [3, 4, 5, 6, 8] {
            assert!(ncycle_box(n).unwrap().is_nonsignalling(1e-12).nonsignalling);
        }
        assert_eq!(ncycle_scenario(2).unwrap_err(), Error::NTooSmall(2));
    }

    #[test]
    fn counterexample_is_renormalised() {
        let e = mim_counterexample();
        assert!((e.adjustments()[3] - 1e-4).abs() < 1e-12);
        assert!(e.adjustments()[..3].iter().all(|&a| a.abs() < 1e-12));
    }

    #[test]
    fn exact_chsh_is_normalised() {
        let v = chsh_quantum_exact();
        for k in 0..4 {
            let sum: BigRational = v[4 * k..4 * k + 4].iter().cloned().sum();
            assert_eq!(sum, BigRational::from_integer(1.into()));
        }
        let err = (sqrt2_rational() * sqrt2_rational()) - BigRational::from_integer(2.into());
        assert!(num_traits::Signed::abs(&err) < BigRational::new(1.into(), 1_000_000_000_000i64.into()));
    }

    #[test]
    fn bad_choices_are_rejected() {
        let s = chsh_scenario();
        assert!(matches!(deterministic_vertex(&s, &[0, 0, 0]), Err(Error::BadOutcomeChoice(_))));
        assert!(matches!(deterministic_vertex(&s, &[0, 0, 0, 4]), Err(Error::BadOutcomeChoice(_))));
        assert!(matches!(deterministic_from_global(&s, &[0, 2, 0, 0]), Err(Error::BadOutcomeChoice(_))));
    }

    #[test]
    fn random_models_are_seeded() {
        let s = ncycle_scenario(5).unwrap();
        assert_eq!(random_model(&s, 7), random_model(&s, 7));
        assert_ne!(random_model(&s, 7), random_model(&s, 8));
    }

    #[test]
    fn entries_build() {
        for entry in entries() {
            entry.build(&Params::default()).unwrap();
        }
        assert!(entry("nope").is_err());
    }
}

//! Text documents for models, hidden-variable models and reports.
//!
//! Models are TOML:
//!
//! ```toml
//! [scenario]
//! measurements = ["a", "b"]
//! contexts = [["a", "b"]]
//!
//! [scenario.outcomes]
//! "a" = ["0", "1"]
//! "b" = ["0", "1"]
//!
//! [model."a,b"]
//! "0,0" = 0.5
//! "1,1" = 0.5
//! ```
//!
//! Context keys join measurement labels in declared context order, outcome
//! keys join outcome labels the same way; omitted outcomes have probability 0.
//! A `[counts."a,b"]` section of raw event counts may replace `[model]`.
//! The writer is canonical: declared order, every key quoted, probabilities
//! at 12 significant digits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use toml::{Table, Value};

use crate::empirical::{EmpiricalModel, Normalization};
use crate::error::{Error, Result};
use crate::hvm::HiddenVariableModel;
use crate::scenario::MeasurementScenario;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub model: EmpiricalModel,
    /// The probabilities were obtained by normalising counts.
    pub from_counts: bool,
    pub warnings: Vec<String>,
}

fn doc_err(msg: impl Into<String>) -> Error {
    Error::Document(msg.into())
}

fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| doc_err(e.to_string().trim_end().to_string()))
}

fn label(value: &Value, what: &str) -> Result<String> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Integer(i) => Ok(i.to_string()),
        other => Err(doc_err(format!("{what}: expected a string label, found {}", other.type_str()))),
    }
}

fn labels(value: &Value, what: &str) -> Result<Vec<String>> {
    value
        .as_array()
        .ok_or_else(|| doc_err(format!("{what} must be an array")))?
        .iter()
        .map(|v| label(v, what))
        .collect()
}

fn section<'a>(table: &'a Table, key: &str) -> Result<&'a Table> {
    table
        .get(key)
        .ok_or_else(|| doc_err(format!("missing [{key}] section")))?
        .as_table()
        .ok_or_else(|| doc_err(format!("[{key}] must be a table")))
}

fn parse_scenario(root: &Table) -> Result<Arc<MeasurementScenario>> {
    let sc = section(root, "scenario")?;
    let measurements = labels(
        sc.get("measurements").ok_or_else(|| doc_err("scenario.measurements is missing"))?,
        "scenario.measurements",
    )?;
    let contexts: Vec<Vec<String>> = sc
        .get("contexts")
        .ok_or_else(|| doc_err("scenario.contexts is missing"))?
        .as_array()
        .ok_or_else(|| doc_err("scenario.contexts must be an array of arrays"))?
        .iter()
        .map(|c| labels(c, "scenario.contexts"))
        .collect::<Result<_>>()?;
    let outcome_table = section(sc, "outcomes")
        .map_err(|_| doc_err("missing [scenario.outcomes] section"))?;
    let outcomes: Vec<(String, Vec<String>)> = outcome_table
        .iter()
        .map(|(k, v)| Ok((k.clone(), labels(v, &format!("scenario.outcomes.{k}"))?)))
        .collect::<Result<_>>()?;
    for key in sc.keys() {
        if !matches!(key.as_str(), "measurements" | "contexts" | "outcomes") {
            return Err(doc_err(format!("unknown key scenario.{key}")));
        }
    }
    Ok(Arc::new(MeasurementScenario::new(&measurements, &contexts, &outcomes)?))
}

fn number(value: &Value, what: &str) -> Result<f64> {
    match value {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(doc_err(format!("{what}: expected a number, found {}", other.type_str()))),
    }
}

/// Reads per-context tables from `[name."ctx"]` sections.
fn parse_tables(scenario: &MeasurementScenario, table: &Table, name: &str) -> Result<Vec<Vec<f64>>> {
    let context_index: HashMap<String, usize> =
        (0..scenario.context_count()).map(|k| (scenario.context_key(k), k)).collect();
    let mut tables: Vec<Option<Vec<f64>>> = vec![None; scenario.context_count()];
    for (key, value) in table {
        let k = *context_index
            .get(key)
            .ok_or_else(|| doc_err(format!("[{name}.\"{key}\"] is not a declared context")))?;
        let entries = value
            .as_table()
            .ok_or_else(|| doc_err(format!("[{name}.\"{key}\"] must be a table")))?;
        let outcome_index: HashMap<String, usize> = (0..scenario.context_size(k))
            .map(|j| (scenario.joint_outcome_key(k, j), j))
            .collect();
        let mut row = vec![0.0; scenario.context_size(k)];
        for (outcome, p) in entries {
            let j = *outcome_index.get(outcome).ok_or_else(|| {
                doc_err(format!("\"{outcome}\" is not a joint outcome of context \"{key}\""))
            })?;
            row[j] = number(p, &format!("{name}.\"{key}\".\"{outcome}\""))?;
        }
        tables[k] = Some(row);
    }
    tables
        .into_iter()
        .enumerate()
        .map(|(k, t)| {
            t.ok_or_else(|| doc_err(format!("missing [{name}.\"{}\"]", scenario.context_key(k))))
        })
        .collect()
}

pub fn parse_model(text: &str, mode: Normalization) -> Result<ModelDocument> {
    let root = parse_table(text)?;
    for key in root.keys() {
        if !matches!(key.as_str(), "scenario" | "model" | "counts") {
            return Err(doc_err(format!("unknown top-level key '{key}'")));
        }
    }
    let scenario = parse_scenario(&root)?;
    let mut warnings: Vec<String> = scenario.warnings().to_vec();
    let (model, from_counts) = match (root.get("model"), root.get("counts")) {
        (Some(_), Some(_)) => return Err(doc_err("give either [model] or [counts], not both")),
        (None, None) => return Err(doc_err("missing [model] section")),
        (Some(_), None) => {
            let tables = parse_tables(&scenario, section(&root, "model")?, "model")?;
            (EmpiricalModel::with_normalization(scenario.clone(), tables, mode)?, false)
        }
        (None, Some(_)) => {
            let tables = parse_tables(&scenario, section(&root, "counts")?, "counts")?;
            warnings.push(
                "counts converted by plain normalisation; no finite-statistics correction applied"
                    .into(),
            );
            (
                EmpiricalModel::with_normalization(scenario.clone(), tables, Normalization::Renormalize)?,
                true,
            )
        }
    };
    if !from_counts {
        for (k, adj) in model.adjustments().iter().enumerate() {
            if *adj != 0.0 {
                warnings.push(format!(
                    "context \"{}\" renormalised (sum was {})",
                    scenario.context_key(k),
                    format_probability(1.0 - adj)
                ));
            }
        }
    }
    Ok(ModelDocument { model, from_counts, warnings })
}

/// Fixed decimal rendering with 12 significant digits; zero is `0.0`.
pub fn format_probability(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let exponent: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (11 - exponent).max(1) as usize;
    format!("{x:.decimals$}")
}

fn quote(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

fn string_array(items: &[&str]) -> String {
    let parts: Vec<String> = items.iter().map(|s| quote(s)).collect();
    format!("[{}]", parts.join(", "))
}

fn write_scenario(out: &mut String, s: &MeasurementScenario) {
    let measurements: Vec<&str> = s.measurements().iter().map(String::as_str).collect();
    let contexts: Vec<String> =
        (0..s.context_count()).map(|k| string_array(&s.context_labels(k))).collect();
    let _ = writeln!(out, "[scenario]");
    let _ = writeln!(out, "measurements = {}", string_array(&measurements));
    let _ = writeln!(out, "contexts = [{}]", contexts.join(", "));
    let _ = writeln!(out, "\n[scenario.outcomes]");
    for (x, m) in s.measurements().iter().enumerate() {
        let outs: Vec<&str> = s.outcomes(x).iter().map(String::as_str).collect();
        let _ = writeln!(out, "{} = {}", quote(m), string_array(&outs));
    }
}

fn write_tables(out: &mut String, prefix: &str, e: &EmpiricalModel) {
    let s = e.scenario();
    for k in 0..s.context_count() {
        let _ = writeln!(out, "\n[{prefix}.{}]", quote(&s.context_key(k)));
        for (j, p) in e.table(k).iter().enumerate() {
            let _ = writeln!(out, "{} = {}", quote(&s.joint_outcome_key(k, j)), format_probability(*p));
        }
    }
}

/// Canonical model document.
pub fn write_model(e: &EmpiricalModel) -> String {
    let mut out = String::new();
    write_scenario(&mut out, e.scenario());
    write_tables(&mut out, "model", e);
    out
}

/// Hidden-variable model: `[hvm]` with `lambdas` and `prior`, the shared
/// scenario, then `[behaviour."λ"."ctx"]` tables.
pub fn parse_hvm(text: &str) -> Result<HiddenVariableModel> {
    let root = parse_table(text)?;
    for key in root.keys() {
        if !matches!(key.as_str(), "scenario" | "hvm" | "behaviour") {
            return Err(doc_err(format!("unknown top-level key '{key}'")));
        }
    }
    let scenario = parse_scenario(&root)?;
    let head = section(&root, "hvm")?;
    let lambdas = labels(head.get("lambdas").ok_or_else(|| doc_err("hvm.lambdas is missing"))?, "hvm.lambdas")?;
    let prior: Vec<f64> = head
        .get("prior")
        .ok_or_else(|| doc_err("hvm.prior is missing"))?
        .as_array()
        .ok_or_else(|| doc_err("hvm.prior must be an array"))?
        .iter()
        .map(|v| number(v, "hvm.prior"))
        .collect::<Result<_>>()?;
    let behaviours_table = section(&root, "behaviour")?;
    if let Some(extra) = behaviours_table.keys().find(|k| !lambdas.contains(k)) {
        return Err(doc_err(format!("[behaviour.\"{extra}\"] is not a listed λ")));
    }
    let behaviours = lambdas
        .iter()
        .map(|l| {
            let t = behaviours_table
                .get(l)
                .and_then(Value::as_table)
                .ok_or_else(|| doc_err(format!("missing [behaviour.\"{l}\"]")))?;
            let tables = parse_tables(&scenario, t, &format!("behaviour.\"{l}\""))?;
            EmpiricalModel::new(scenario.clone(), tables)
        })
        .collect::<Result<Vec<_>>>()?;
    HiddenVariableModel::new(lambdas, prior, behaviours)
}

pub fn write_hvm(h: &HiddenVariableModel) -> String {
    let mut out = String::new();
    let names: Vec<&str> = h.lambdas().iter().map(String::as_str).collect();
    let prior: Vec<String> = h.prior().iter().map(|p| format_probability(*p)).collect();
    let _ = writeln!(out, "[hvm]");
    let _ = writeln!(out, "lambdas = {}", string_array(&names));
    let _ = writeln!(out, "prior = [{}]\n", prior.join(", "));
    write_scenario(&mut out, h.behaviours()[0].scenario());
    for (l, b) in h.lambdas().iter().zip(h.behaviours()) {
        write_tables(&mut out, &format!("behaviour.{}", quote(l)), b);
    }
    out
}

/// Any serialisable report as a TOML document.
pub fn write_report<T: Serialize>(report: &T) -> Result<String> {
    toml::to_string(report).map_err(|e| doc_err(format!("cannot render report: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn probability_rendering() {
        assert_eq!(format_probability(0.0), "0.0");
        assert_eq!(format_probability(0.5), "0.500000000000");
        assert_eq!(format_probability(1.0), "1.00000000000");
        assert_eq!(format_probability(0.4267766952966369), "0.426776695297");
        assert_eq!(format_probability(1e-4), "0.000100000000000");
        assert_eq!(format_probability(0.099999999999995), "0.100000000000");
    }

    #[test]
    fn pr_box_document() {
        let text = write_model(&catalog::pr_box());
        assert!(text.starts_with("[scenario]\nmeasurements = [\"a\", \"a'\", \"b\", \"b'\"]\n"));
        assert!(text.contains("[model.\"a',b'\"]\n\"0,0\" = 0.0\n\"0,1\" = 0.500000000000\n"));
        let parsed = parse_model(&text, Normalization::Strict).unwrap();
        assert_eq!(parsed.model, catalog::pr_box());
        assert_eq!(write_model(&parsed.model), text);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        for e in [catalog::chsh_quantum(), catalog::mim_counterexample(), catalog::ncycle_box(5).unwrap()] {
            let first = write_model(&e);
            let again = write_model(&parse_model(&first, Normalization::Strict).unwrap().model);
            assert_eq!(first, again);
        }
    }

    #[test]
    fn sparse_tables_and_counts() {
        let text = r#"
[scenario]
measurements = ["x"]
contexts = [["x"]]
[scenario.outcomes]
x = ["up", "down"]
[counts.x]
up = 30
down = 10
"#;
        let doc = parse_model(text, Normalization::Strict).unwrap();
        assert!(doc.from_counts);
        assert_eq!(doc.model.table(0), &[0.75, 0.25]);
        assert_eq!(doc.warnings.len(), 1);

        let sparse = text.replace("[counts.x]\nup = 30\ndown = 10", "[model.x]\nup = 1.0");
        assert_eq!(parse_model(&sparse, Normalization::Strict).unwrap().model.table(0), &[1.0, 0.0]);
    }

    #[test]
    fn malformed_documents() {
        let base = write_model(&catalog::pr_box());
        let kind = |t: &str| parse_model(t, Normalization::Strict).unwrap_err().kind();
        use crate::error::ErrorKind;
        assert_eq!(kind("[scenario"), ErrorKind::Parse);
        assert_eq!(kind(&base.replace("[model.\"a,b\"]", "[model.\"a,z\"]")), ErrorKind::Parse);
        assert_eq!(kind(&base.replace("\"1,1\" = 0.500000000000", "\"1,1\" = 0.4")), ErrorKind::Validation);
        assert_eq!(kind(&base.replace("\"0,0\" = 0.500000000000", "\"0,0\" = -0.5")), ErrorKind::Validation);
        assert_eq!(kind(&format!("{base}\n[extra]\nx = 1\n")), ErrorKind::Parse);
    }

    #[test]
    fn hvm_round_trip() {
        let hvm = catalog::chsh_table_hvm();
        let text = write_hvm(&hvm);
        let back = parse_hvm(&text).unwrap();
        assert_eq!(back, hvm);
        assert_eq!(write_hvm(&back), text);
    }
}

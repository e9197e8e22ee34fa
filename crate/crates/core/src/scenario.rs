//! Measurement scenarios, their global/local assignment index spaces and the
//! incidence matrix relating the two.
//!
//! Ordering convention: joint outcomes are encoded mixed-radix with the first
//! listed measurement as the most significant digit. Global assignments use
//! the scenario's measurement order; local assignments use the context's own
//! declared order. For binary outcomes this gives the usual `00, 01, 10, 11`.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasurementScenario {
    measurements: Vec<String>,
    /// Each context as indices into `measurements`, in declared order.
    contexts: Vec<Vec<usize>>,
    /// Outcome labels per measurement, in declared order.
    outcomes: Vec<Vec<String>>,
    /// |O_C| per context.
    context_sizes: Vec<usize>,
    /// First local-assignment index of each context block.
    context_offsets: Vec<usize>,
    global_count: usize,
    local_count: usize,
    #[serde(skip)]
    warnings: Vec<String>,
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains(',') {
        return Err(Error::InvalidLabel(label.to_string()));
    }
    Ok(())
}

impl MeasurementScenario {
    /// Validates and freezes a scenario.
    ///
    /// `outcomes` may list measurements in any order; it must contain exactly
    /// one entry per measurement label.
    pub fn new<S: AsRef<str>>(
        measurements: &[S],
        contexts: &[Vec<S>],
        outcomes: &[(S, Vec<S>)],
    ) -> Result<Self> {
        let measurements: Vec<String> =
            measurements.iter().map(|m| m.as_ref().to_string()).collect();
        let mut position = HashMap::new();
        for (i, label) in measurements.iter().enumerate() {
            check_label(label)?;
            if position.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }

        let mut outcome_lists: Vec<Option<Vec<String>>> = vec![None; measurements.len()];
        for (label, list) in outcomes {
            let label = label.as_ref();
            let &i = position.get(label).ok_or_else(|| {
                Error::InvalidInput(format!("outcomes given for unknown measurement `{label}`"))
            })?;
            if outcome_lists[i].is_some() {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
            let list: Vec<String> = list.iter().map(|o| o.as_ref().to_string()).collect();
            let mut seen = HashSet::new();
            for o in &list {
                check_label(o)?;
                if !seen.insert(o.as_str()) {
                    return Err(Error::DuplicateLabel(format!("{label}:{o}")));
                }
            }
            outcome_lists[i] = Some(list);
        }

        let mut warnings = Vec::new();
        let mut resolved = Vec::with_capacity(measurements.len());
        for (label, list) in measurements.iter().zip(outcome_lists) {
            match list {
                None => return Err(Error::MissingOutcomes(label.clone())),
                Some(list) if list.is_empty() => return Err(Error::MissingOutcomes(label.clone())),
                Some(list) => {
                    if list.len() == 1 {
                        warnings.push(format!("measurement `{label}` has a single outcome"));
                    }
                    resolved.push(list);
                }
            }
        }

        let mut ctx_indices = Vec::with_capacity(contexts.len());
        let mut seen_contexts: HashSet<Vec<usize>> = HashSet::new();
        let mut covered = vec![false; measurements.len()];
        for (k, ctx) in contexts.iter().enumerate() {
            if ctx.is_empty() {
                return Err(Error::EmptyContext(k));
            }
            let mut idx = Vec::with_capacity(ctx.len());
            for label in ctx {
                let label = label.as_ref();
                let &i = position.get(label).ok_or_else(|| {
                    Error::UnknownMeasurementInContext { context: k, label: label.to_string() }
                })?;
                if idx.contains(&i) {
                    return Err(Error::DuplicateLabel(label.to_string()));
                }
                covered[i] = true;
                idx.push(i);
            }
            let mut key = idx.clone();
            key.sort_unstable();
            if !seen_contexts.insert(key) {
                return Err(Error::DuplicateLabel(format!("context #{k}")));
            }
            ctx_indices.push(idx);
        }
        let missing: Vec<String> = measurements
            .iter()
            .zip(&covered)
            .filter(|(_, &c)| !c)
            .map(|(m, _)| m.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::CoverViolation { missing });
        }

        for (a, ca) in ctx_indices.iter().enumerate() {
            for (b, cb) in ctx_indices.iter().enumerate() {
                if a != b && ca.len() < cb.len() && ca.iter().all(|x| cb.contains(x)) {
                    warnings.push(format!("context #{a} is contained in context #{b}"));
                }
            }
        }

        let context_sizes: Vec<usize> = ctx_indices
            .iter()
            .map(|c| c.iter().map(|&x| resolved[x].len()).fold(1usize, usize::saturating_mul))
            .collect();
        let mut context_offsets = Vec::with_capacity(context_sizes.len());
        let mut local_count = 0usize;
        for &size in &context_sizes {
            context_offsets.push(local_count);
            local_count = local_count.saturating_add(size);
        }
        let global_count = resolved.iter().map(Vec::len).fold(1usize, usize::saturating_mul);

        Ok(Self {
            measurements,
            contexts: ctx_indices,
            outcomes: resolved,
            context_sizes,
            context_offsets,
            global_count,
            local_count,
            warnings,
        })
    }

    pub fn measurements(&self) -> &[String] {
        &self.measurements
    }

    pub fn measurement_index(&self, label: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m == label)
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    pub fn context(&self, k: usize) -> &[usize] {
        &self.contexts[k]
    }

    pub fn context_count(&self) -> usize {
        self.contexts.len()
    }

    pub fn context_labels(&self, k: usize) -> Vec<&str> {
        self.contexts[k].iter().map(|&x| self.measurements[x].as_str()).collect()
    }

    pub fn outcomes(&self, measurement: usize) -> &[String] {
        &self.outcomes[measurement]
    }

    pub fn outcome_count(&self, measurement: usize) -> usize {
        self.outcomes[measurement].len()
    }

    /// |O_C| for context `k`.
    pub fn context_size(&self, k: usize) -> usize {
        self.context_sizes[k]
    }

    /// Index range of context `k` in the local-assignment space.
    pub fn context_range(&self, k: usize) -> std::ops::Range<usize> {
        self.context_offsets[k]..self.context_offsets[k] + self.context_sizes[k]
    }

    /// n, the number of global assignments (saturates at `usize::MAX`).
    pub fn global_count(&self) -> usize {
        self.global_count
    }

    /// m, the number of local assignments over all contexts.
    pub fn local_count(&self) -> usize {
        self.local_count
    }

    /// Non-fatal lints collected at construction.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Encodes a joint outcome (outcome indices, one per listed measurement)
    /// mixed-radix over `measurements`.
    pub fn encode_joint(&self, measurements: &[usize], outcome: &[usize]) -> usize {
        debug_assert_eq!(measurements.len(), outcome.len());
        measurements
            .iter()
            .zip(outcome)
            .fold(0, |acc, (&x, &o)| acc * self.outcomes[x].len() + o)
    }

    /// Inverse of [`encode_joint`](Self::encode_joint).
    pub fn decode_joint(&self, measurements: &[usize], mut index: usize) -> Vec<usize> {
        let mut out = vec![0; measurements.len()];
        for (slot, &x) in out.iter_mut().zip(measurements).rev() {
            let radix = self.outcomes[x].len();
            *slot = index % radix;
            index /= radix;
        }
        out
    }

    /// Decodes a global assignment index into one outcome index per measurement.
    pub fn decode_global(&self, index: usize) -> Vec<usize> {
        let all: Vec<usize> = (0..self.measurements.len()).collect();
        self.decode_joint(&all, index)
    }

    pub fn encode_global(&self, assignment: &[usize]) -> usize {
        let all: Vec<usize> = (0..self.measurements.len()).collect();
        self.encode_joint(&all, assignment)
    }

    /// Local-assignment index ⟨C, s⟩ for context `k` and joint outcome index `s`.
    pub fn encode_local(&self, k: usize, joint: usize) -> usize {
        debug_assert!(joint < self.context_sizes[k]);
        self.context_offsets[k] + joint
    }

    /// Splits a local-assignment index into (context, joint outcome index).
    pub fn decode_local(&self, index: usize) -> (usize, usize) {
        let k = match self.context_offsets.binary_search(&index) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        (k, index - self.context_offsets[k])
    }

    /// Joint outcome index on context `k` of the restriction g|_C.
    pub fn restrict(&self, assignment: &[usize], k: usize) -> usize {
        self.contexts[k]
            .iter()
            .fold(0, |acc, &x| acc * self.outcomes[x].len() + assignment[x])
    }

    /// Comma-joined outcome labels for joint outcome `joint` on context `k`.
    pub fn joint_outcome_key(&self, k: usize, joint: usize) -> String {
        let ctx = &self.contexts[k];
        self.decode_joint(ctx, joint)
            .iter()
            .zip(ctx)
            .map(|(&o, &x)| self.outcomes[x][o].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Comma-joined measurement labels of context `k`.
    pub fn context_key(&self, k: usize) -> String {
        self.context_labels(k).join(",")
    }

    /// Measurements shared by contexts `a` and `b`, in canonical order.
    pub fn intersection(&self, a: usize, b: usize) -> Vec<usize> {
        let mut shared: Vec<usize> =
            self.contexts[a].iter().copied().filter(|x| self.contexts[b].contains(x)).collect();
        shared.sort_unstable();
        shared
    }

    pub fn incidence_matrix(&self) -> Result<IncidenceMatrix> {
        self.incidence_matrix_with_cap(tolerance::DEFAULT_SIZE_CAP)
    }

    pub fn incidence_matrix_with_cap(&self, cap: usize) -> Result<IncidenceMatrix> {
        let entries = self.local_count as u128 * self.global_count as u128;
        let saturated = self.global_count == usize::MAX || self.local_count == usize::MAX;
        if saturated || entries > cap as u128 {
            return Err(Error::SizeCapExceeded { entries, cap });
        }
        let (rows, cols) = (self.local_count, self.global_count);
        let mut entries = vec![0u8; rows * cols];
        let mut support = Vec::with_capacity(cols);
        for g in 0..cols {
            let assignment = self.decode_global(g);
            let col: Vec<usize> = (0..self.contexts.len())
                .map(|k| self.encode_local(k, self.restrict(&assignment, k)))
                .collect();
            for &r in &col {
                entries[r * cols + g] = 1;
            }
            support.push(col);
        }
        Ok(IncidenceMatrix { rows, cols, entries, support })
    }
}

/// Dense m×n 0/1 restriction matrix: row ⟨C, s⟩, column g, entry 1 iff g|_C = s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
    /// For each column, the row hit in each context (one per context).
    support: Vec<Vec<usize>>,
}

impl IncidenceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    /// Rows with a 1 in column `col`, one per context.
    pub fn column_support(&self, col: usize) -> &[usize] {
        &self.support[col]
    }

    /// M·b for a vector over global assignments.
    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (g, rows) in self.support.iter().enumerate() {
            for &r in rows {
                out[r] += b[g];
            }
        }
        out
    }

    /// Mᵀ·y for a vector over local assignments.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.support.iter().map(|rows| rows.iter().map(|&r| y[r]).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(labels: &[&str]) -> Vec<(String, Vec<String>)> {
        labels.iter().map(|l| (l.to_string(), vec!["0".into(), "1".into()])).collect()
    }

    fn chsh() -> MeasurementScenario {
        let ctx = vec![vec!["a", "b"], vec!["a", "b'"], vec!["a'", "b"], vec!["a'", "b'"]];
        let outcomes: Vec<(&str, Vec<&str>)> =
            ["a", "a'", "b", "b'"].iter().map(|&l| (l, vec!["0", "1"])).collect();
        MeasurementScenario::new(&["a", "a'", "b", "b'"], &ctx, &outcomes).unwrap()
    }

    fn cycle(n: usize) -> MeasurementScenario {
        let labels: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
        let ctx: Vec<Vec<String>> =
            (0..n).map(|i| vec![labels[i].clone(), labels[(i + 1) % n].clone()]).collect();
        let outcomes = binary(&labels.iter().map(String::as_str).collect::<Vec<_>>());
        MeasurementScenario::new(&labels, &ctx, &outcomes).unwrap()
    }

    #[test]
    fn chsh_counts() {
        let s = chsh();
        assert_eq!(s.global_count(), 16);
        assert_eq!(s.local_count(), 16);
    }

    #[test]
    fn single_measurement_counts_and_identity_matrix() {
        let s = MeasurementScenario::new(&["x"], &[vec!["x"]], &[("x", vec!["0", "1"])]).unwrap();
        assert_eq!((s.global_count(), s.local_count()), (2, 2));
        let m = s.incidence_matrix().unwrap();
        assert_eq!(m.row(0), &[1, 0]);
        assert_eq!(m.row(1), &[0, 1]);
    }

    #[test]
    fn five_cycle_counts_and_row_support() {
        let s = cycle(5);
        assert_eq!((s.global_count(), s.local_count()), (32, 20));
        let m = s.incidence_matrix().unwrap();
        assert_eq!((m.rows(), m.cols()), (20, 32));
        for r in 0..20 {
            assert_eq!(m.row(r).iter().filter(|&&x| x == 1).count(), 8);
        }
    }

    #[test]
    fn chsh_columns_sum_to_context_count() {
        let s = chsh();
        let m = s.incidence_matrix().unwrap();
        for g in 0..m.cols() {
            let sum: u32 = (0..m.rows()).map(|r| m.get(r, g) as u32).sum();
            assert_eq!(sum, 4);
            for k in 0..s.context_count() {
                let ones = s.context_range(k).filter(|&r| m.get(r, g) == 1).count();
                assert_eq!(ones, 1);
            }
        }
    }

    #[test]
    fn incidence_entry_matches_restriction_definition() {
        let s = cycle(4);
        let m = s.incidence_matrix().unwrap();
        for g in 0..s.global_count() {
            let assignment = s.decode_global(g);
            for r in 0..s.local_count() {
                let (k, joint) = s.decode_local(r);
                let s_vals = s.decode_joint(s.context(k), joint);
                let agrees = s.context(k).iter().zip(&s_vals).all(|(&x, &o)| assignment[x] == o);
                assert_eq!(m.get(r, g) == 1, agrees);
            }
        }
    }

    #[test]
    fn binary_order_is_first_measurement_most_significant() {
        let s = chsh();
        let keys: Vec<String> = (0..4).map(|j| s.joint_outcome_key(0, j)).collect();
        assert_eq!(keys, ["0,0", "0,1", "1,0", "1,1"]);
        assert_eq!(s.decode_global(1), vec![0, 0, 0, 1]);
    }

    #[test]
    fn round_trips_on_mixed_radix_scenario() {
        let outcomes = vec![
            ("x", vec!["u", "v", "w"]),
            ("y", vec!["0", "1"]),
            ("z", vec!["p", "q", "r", "s"]),
        ];
        let s = MeasurementScenario::new(
            &["x", "y", "z"],
            &[vec!["x", "y"], vec!["z", "x"], vec!["y", "z"]],
            &outcomes,
        )
        .unwrap();
        assert_eq!(s.global_count(), 24);
        assert_eq!(s.local_count(), 6 + 12 + 8);
        for g in 0..s.global_count() {
            assert_eq!(s.encode_global(&s.decode_global(g)), g);
        }
        for l in 0..s.local_count() {
            let (k, j) = s.decode_local(l);
            assert!(s.context_range(k).contains(&l));
            assert_eq!(s.encode_local(k, j), l);
        }
    }

    fn owned(labels: &[&str]) -> Vec<String> {
        labels.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rejects_malformed_inputs() {
        let o = binary(&["a", "b"]);
        assert!(matches!(
            MeasurementScenario::new(&owned(&["a", "b"]), &[vec!["a".to_string()]], &o),
            Err(Error::CoverViolation { .. })
        ));
        assert!(matches!(
            MeasurementScenario::new(&owned(&["a", "a"]), &[vec!["a".to_string()]], &o[..1]),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(
            MeasurementScenario::new(&owned(&["a", "b"]), &[vec![], vec!["a".into(), "b".into()]], &o),
            Err(Error::EmptyContext(0))
        ));
        assert!(matches!(
            MeasurementScenario::new(&owned(&["a", "b"]), &[vec!["a".to_string(), "c".to_string()]], &o),
            Err(Error::UnknownMeasurementInContext { .. })
        ));
        assert!(matches!(
            MeasurementScenario::new(&owned(&["a", "b"]), &[vec!["a".to_string(), "a".to_string()]], &o),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn subset_context_is_linted_not_rejected() {
        let o = binary(&["a", "b"]);
        let s = MeasurementScenario::new(
            &owned(&["a", "b"]),
            &[vec!["a".to_string(), "b".to_string()], vec!["a".to_string()]],
            &o,
        )
        .unwrap();
        assert_eq!(s.warnings().len(), 1);
    }

    #[test]
    fn size_cap_is_enforced() {
        let s = cycle(8);
        let err = s.incidence_matrix_with_cap(100).unwrap_err();
        assert_eq!(err, Error::SizeCapExceeded { entries: 32 * 256, cap: 100 });
    }
}

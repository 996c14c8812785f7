//! Expansion of incomplete rows into candidate hypothesis rows.
//!
//! Every training row whose hypothesis column is missing becomes one
//! candidate row per class value. Complete rows can additionally be expanded
//! to build the exclusion list: copies whose class differs from the observed
//! value are known wrong and permanently barred from selection, while the
//! copy matching the observed value duplicates the original row and is kept
//! out of training altogether.

use crate::data::{DataMatrix, HypothesisSpec, SplitPlan};
use crate::error::{Error, Result};

/// One candidate completion of a source row.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisRow {
    /// Stable id, dense from 0; selection history is keyed on it.
    pub id: usize,
    pub source_row: usize,
    pub class_id: usize,
    /// Class value substituted into the missing cell.
    pub value: f64,
    /// Known wrong: a copy of a complete row with a different class.
    pub excluded: bool,
    /// Copy of a complete row with the matching class; never trained on
    /// because the original row already contributes (amplified).
    pub ground_copy: bool,
}

/// Complete rows plus hypothesis rows for one training partition.
#[derive(Debug, Clone)]
pub struct ExpandedBatch {
    /// Training rows with the hypothesis column observed.
    pub ground_rows: Vec<usize>,
    /// Training rows with the hypothesis column missing.
    pub incomplete_rows: Vec<usize>,
    pub hypothesis_rows: Vec<HypothesisRow>,
    pub spec: HypothesisSpec,
}

impl ExpandedBatch {
    /// Hypothesis rows that may ever be selected for backpropagation.
    pub fn selectable(&self) -> impl Iterator<Item = &HypothesisRow> {
        self.hypothesis_rows
            .iter()
            .filter(|h| !h.excluded && !h.ground_copy)
    }

    pub fn n_classes(&self) -> usize {
        self.spec.class_values.len()
    }
}

/// Expands the training partition of `data` against `spec`.
///
/// A fully observed column with `include_ground_expansion` unset yields an
/// empty hypothesis set (a no-op, not an error). Rows with a missing cell in
/// any *other* feature column are out of scope and rejected.
pub fn expand_hypotheses(
    data: &DataMatrix,
    plan: &SplitPlan,
    spec: &HypothesisSpec,
    include_ground_expansion: bool,
) -> Result<ExpandedBatch> {
    if spec.column >= data.n_cols() || spec.column == data.target {
        return Err(Error::Config(format!(
            "hypothesis column {} is out of range or the target",
            spec.column
        )));
    }
    let mut ground_rows = Vec::new();
    let mut incomplete_rows = Vec::new();
    for &r in &plan.train {
        for c in data.feature_columns() {
            if c != spec.column && data.missing[r][c] {
                return Err(Error::Data(format!(
                    "row {r} has a missing cell outside the hypothesis column"
                )));
            }
        }
        if data.missing[r][spec.column] {
            incomplete_rows.push(r);
        } else {
            ground_rows.push(r);
        }
    }

    let mut hypothesis_rows = Vec::new();
    let mut next_id = 0;
    for &r in &incomplete_rows {
        for (class_id, &value) in spec.class_values.iter().enumerate() {
            hypothesis_rows.push(HypothesisRow {
                id: next_id,
                source_row: r,
                class_id,
                value,
                excluded: false,
                ground_copy: false,
            });
            next_id += 1;
        }
    }
    if include_ground_expansion {
        for &r in &ground_rows {
            let observed = data.values[r][spec.column];
            let correct = spec.nearest_class(observed);
            for (class_id, &value) in spec.class_values.iter().enumerate() {
                hypothesis_rows.push(HypothesisRow {
                    id: next_id,
                    source_row: r,
                    class_id,
                    value,
                    excluded: class_id != correct,
                    ground_copy: class_id == correct,
                });
                next_id += 1;
            }
        }
    }
    Ok(ExpandedBatch {
        ground_rows,
        incomplete_rows,
        hypothesis_rows,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnStats;

    fn matrix_with_missing(missing_rows: &[usize]) -> (DataMatrix, SplitPlan) {
        let n = 8;
        let mut values = Vec::new();
        let mut missing = Vec::new();
        for r in 0..n {
            let v = r as f64 * 0.1;
            values.push(vec![v, 0.35, v + 1.0]);
            missing.push(vec![false, missing_rows.contains(&r), false]);
        }
        for &r in missing_rows {
            values[r][1] = f64::NAN;
        }
        let data = DataMatrix {
            column_names: vec!["a".into(), "h".into(), "y".into()],
            values,
            missing,
            target: 2,
            standardization: None,
        };
        let plan = SplitPlan {
            train: (0..6).collect(),
            validation: vec![6],
            test: vec![7],
            seed: 0,
        };
        (data, plan)
    }

    fn spec() -> HypothesisSpec {
        HypothesisSpec {
            column: 1,
            class_values: vec![0.1, 0.3, 0.5],
        }
    }

    #[test]
    fn single_incomplete_row_expands_per_class() {
        let (data, plan) = matrix_with_missing(&[2]);
        let batch = expand_hypotheses(&data, &plan, &spec(), false).unwrap();
        assert_eq!(batch.incomplete_rows, vec![2]);
        assert_eq!(batch.ground_rows.len(), 5);
        assert_eq!(batch.hypothesis_rows.len(), 3);
        let sources: Vec<usize> = batch.hypothesis_rows.iter().map(|h| h.source_row).collect();
        assert_eq!(sources, vec![2, 2, 2]);
        let classes: Vec<usize> = batch.hypothesis_rows.iter().map(|h| h.class_id).collect();
        assert_eq!(classes, vec![0, 1, 2]);
        assert!(batch.hypothesis_rows.iter().all(|h| !h.excluded));
    }

    #[test]
    fn fully_observed_without_ground_expansion_is_a_noop() {
        let (data, plan) = matrix_with_missing(&[]);
        let batch = expand_hypotheses(&data, &plan, &spec(), false).unwrap();
        assert!(batch.hypothesis_rows.is_empty());
        assert_eq!(batch.ground_rows.len(), 6);
    }

    #[test]
    fn ground_expansion_flags_wrong_classes() {
        let (data, plan) = matrix_with_missing(&[0]);
        let batch = expand_hypotheses(&data, &plan, &spec(), true).unwrap();
        // 1 incomplete x 3 classes + 5 ground x 3 classes.
        assert_eq!(batch.hypothesis_rows.len(), 3 + 15);
        for h in &batch.hypothesis_rows {
            if batch.incomplete_rows.contains(&h.source_row) {
                assert!(!h.excluded && !h.ground_copy);
            } else {
                // Observed value is 0.35, nearest class is 0.3 (id 1).
                if h.class_id == 1 {
                    assert!(h.ground_copy && !h.excluded);
                } else {
                    assert!(h.excluded && !h.ground_copy);
                }
            }
        }
        // Exactly one ground copy per ground row.
        let copies = batch.hypothesis_rows.iter().filter(|h| h.ground_copy).count();
        assert_eq!(copies, 5);
        // Selectable = only the incomplete-source hypotheses.
        assert_eq!(batch.selectable().count(), 3);
    }

    #[test]
    fn row_count_identity_holds() {
        for missing in [vec![], vec![1], vec![0, 3, 5]] {
            let (data, plan) = matrix_with_missing(&missing);
            for flag in [false, true] {
                let batch = expand_hypotheses(&data, &plan, &spec(), flag).unwrap();
                let expect = missing.len() * 3 + if flag { (6 - missing.len()) * 3 } else { 0 };
                assert_eq!(batch.hypothesis_rows.len(), expect);
            }
        }
    }

    #[test]
    fn ids_are_dense_and_stable() {
        let (data, plan) = matrix_with_missing(&[1, 4]);
        let a = expand_hypotheses(&data, &plan, &spec(), true).unwrap();
        let b = expand_hypotheses(&data, &plan, &spec(), true).unwrap();
        for (x, y) in a.hypothesis_rows.iter().zip(&b.hypothesis_rows) {
            assert_eq!(x, y);
        }
        for (i, h) in a.hypothesis_rows.iter().enumerate() {
            assert_eq!(h.id, i);
        }
    }

    #[test]
    fn nearest_class_exclusion_uses_standardized_space_consistently() {
        // Same behaviour whether values were standardized or not, as long as
        // the spec lives in the same space as the matrix.
        let (mut data, plan) = matrix_with_missing(&[0]);
        data.standardization = Some(vec![
            ColumnStats { mean: 0.0, std: 1.0 };
            3
        ]);
        let batch = expand_hypotheses(&data, &plan, &spec(), true).unwrap();
        assert!(batch.hypothesis_rows.iter().any(|h| h.ground_copy));
    }
}

//! Numeric dataset handling: CSV loading with an explicit missingness mask,
//! train/validation/test splitting, column standardization, missingness and
//! label-noise simulation, and hypothesis-class derivation.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::quantile;

/// Mean and standard deviation used to z-score one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

/// A numeric table with an explicit missingness mask.
///
/// `missing[r][c]` is true where the cell is absent; `values[r][c]` is only
/// meaningful where the mask is false. The target column is never missing.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    pub column_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub missing: Vec<Vec<bool>>,
    pub target: usize,
    /// Per-column stats applied by [`standardize`]; `None` for raw data.
    pub standardization: Option<Vec<ColumnStats>>,
}

/// Equality compares observed cells only; masked cells hold no value.
impl PartialEq for DataMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.column_names == other.column_names
            && self.target == other.target
            && self.missing == other.missing
            && self.standardization == other.standardization
            && self.values.len() == other.values.len()
            && self.values.iter().enumerate().all(|(r, row)| {
                row.iter()
                    .enumerate()
                    .all(|(c, v)| self.missing[r][c] || *v == other.values[r][c])
            })
    }
}

/// Disjoint row-id partition of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Candidate values a missing variable may assume, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSpec {
    pub column: usize,
    pub class_values: Vec<f64>,
}

/// How hypothesis class values are derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassMode {
    /// Use these values as given.
    Explicit(Vec<f64>),
    /// Midpoints of k quantile bins over the observed cells of the column.
    QuantileBins(usize),
}

impl DataMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Indices of all non-target columns, in column order.
    pub fn feature_columns(&self) -> Vec<usize> {
        (0..self.n_cols()).filter(|&c| c != self.target).collect()
    }

    pub fn is_row_complete(&self, row: usize) -> bool {
        self.missing[row].iter().all(|&m| !m)
    }

    /// Feature vector for a row, optionally substituting `fill` for one
    /// column. Errors if any needed cell is still missing.
    pub fn features_of(&self, row: usize, fill: Option<(usize, f64)>) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_cols() - 1);
        for c in self.feature_columns() {
            if let Some((fc, fv)) = fill {
                if fc == c {
                    out.push(fv);
                    continue;
                }
            }
            if self.missing[row][c] {
                return Err(Error::Data(format!(
                    "row {row} column {c} is missing and no fill value was provided"
                )));
            }
            out.push(self.values[row][c]);
        }
        Ok(out)
    }

    pub fn target_of(&self, row: usize) -> f64 {
        self.values[row][self.target]
    }

    /// Feature matrix and target vector for the given rows (all cells must
    /// be observed).
    pub fn complete_xy(&self, rows: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let mut x = Vec::with_capacity(rows.len());
        let mut y = Vec::with_capacity(rows.len());
        for &r in rows {
            x.push(self.features_of(r, None)?);
            y.push(self.target_of(r));
        }
        Ok((x, y))
    }

    /// Inverse of the standardization transform for one column value.
    pub fn destandardize_value(&self, col: usize, v: f64) -> f64 {
        match &self.standardization {
            Some(stats) => v * stats[col].std + stats[col].mean,
            None => v,
        }
    }

    /// Maps a raw-unit value into the standardized space of this matrix.
    pub fn standardize_value(&self, col: usize, v: f64) -> f64 {
        match &self.standardization {
            Some(stats) => (v - stats[col].mean) / stats[col].std,
            None => v,
        }
    }
}

/// Loads a comma-separated UTF-8 file with a header row. Empty cells become
/// missing-mask entries; every other cell must parse as a finite number.
/// The target column must be fully observed.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let column_names: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let target = column_names
        .iter()
        .position(|c| c == target_column)
        .ok_or_else(|| {
            Error::Data(format!(
                "target column {target_column:?} not found in {:?}",
                column_names
            ))
        })?;

    let mut values = Vec::new();
    let mut missing = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?; // the csv reader rejects ragged rows itself
        let mut row = Vec::with_capacity(column_names.len());
        let mut mask = Vec::with_capacity(column_names.len());
        for (c, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                if c == target {
                    return Err(Error::Data(format!(
                        "target column has an empty cell at data row {line}"
                    )));
                }
                row.push(f64::NAN);
                mask.push(true);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!(
                        "non-numeric cell {cell:?} at data row {line}, column {:?}",
                        column_names[c]
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::Data(format!(
                        "non-finite cell {cell:?} at data row {line}, column {:?}",
                        column_names[c]
                    )));
                }
                row.push(v);
                mask.push(false);
            }
        }
        values.push(row);
        missing.push(mask);
    }
    if values.is_empty() {
        return Err(Error::Data("dataset has no data rows".into()));
    }
    Ok(DataMatrix {
        column_names,
        values,
        missing,
        target,
        standardization: None,
    })
}

/// Writes a matrix back to CSV, emitting empty cells where the mask is set.
pub fn write_csv(data: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(&data.column_names)?;
    for r in 0..data.n_rows() {
        let rec: Vec<String> = (0..data.n_cols())
            .map(|c| {
                if data.missing[r][c] {
                    String::new()
                } else {
                    format!("{}", data.values[r][c])
                }
            })
            .collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Deterministic shuffle-then-partition split.
pub fn split_dataset(data: &DataMatrix, fractions: (f64, f64, f64), seed: u64) -> Result<SplitPlan> {
    let (ft, fv, fs) = fractions;
    if ft <= 0.0 || fv <= 0.0 || fs <= 0.0 {
        return Err(Error::Config("split fractions must be positive".into()));
    }
    if (ft + fv + fs - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions must sum to 1, got {}",
            ft + fv + fs
        )));
    }
    let n = data.n_rows();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rows.shuffle(&mut rng);
    let n_train = (ft * n as f64).round() as usize;
    let n_val = (fv * n as f64).round() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= n {
        return Err(Error::Config(format!(
            "split of {n} rows leaves an empty partition"
        )));
    }
    Ok(SplitPlan {
        train: rows[..n_train].to_vec(),
        validation: rows[n_train..n_train + n_val].to_vec(),
        test: rows[n_train + n_val..].to_vec(),
        seed,
    })
}

/// Z-scores every column using statistics from the observed cells of the
/// training rows only. A zero-variance column maps to zeros.
pub fn standardize(data: &DataMatrix, plan: &SplitPlan) -> Result<DataMatrix> {
    if data.standardization.is_some() {
        return Err(Error::Config("data is already standardized".into()));
    }
    let mut stats = Vec::with_capacity(data.n_cols());
    for c in 0..data.n_cols() {
        let observed: Vec<f64> = plan
            .train
            .iter()
            .filter(|&&r| !data.missing[r][c])
            .map(|&r| data.values[r][c])
            .collect();
        if observed.is_empty() {
            return Err(Error::Data(format!(
                "column {:?} has no observed training cells",
                data.column_names[c]
            )));
        }
        let mean = observed.iter().sum::<f64>() / observed.len() as f64;
        let var = observed.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / observed.len() as f64;
        let std = var.sqrt();
        stats.push(ColumnStats {
            mean,
            std: if std < 1e-12 { 1.0 } else { std },
        });
    }
    let mut out = data.clone();
    for r in 0..out.n_rows() {
        for c in 0..out.n_cols() {
            if !out.missing[r][c] {
                out.values[r][c] = (out.values[r][c] - stats[c].mean) / stats[c].std;
            }
        }
    }
    out.standardization = Some(stats);
    Ok(out)
}

/// Masks exactly `round(rate * train_rows)` training cells of one column,
/// chosen uniformly at random. Validation and test rows are untouched.
pub fn mask_column(
    data: &DataMatrix,
    plan: &SplitPlan,
    column: usize,
    missing_rate: f64,
    seed: u64,
) -> Result<DataMatrix> {
    if !(0.0..1.0).contains(&missing_rate) {
        return Err(Error::Config(format!(
            "missing rate must be in [0, 1), got {missing_rate}"
        )));
    }
    if column == data.target {
        return Err(Error::Config("cannot mask the target column".into()));
    }
    let n_mask = (missing_rate * plan.train.len() as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = plan.train.clone();
    candidates.shuffle(&mut rng);
    let mut out = data.clone();
    for &r in candidates.iter().take(n_mask) {
        out.missing[r][column] = true;
        out.values[r][column] = f64::NAN;
    }
    if plan.train.iter().all(|&r| out.missing[r][column]) {
        return Err(Error::Config(
            "masking would leave zero observed training cells".into(),
        ));
    }
    Ok(out)
}

/// Shifts the target of `round(fraction * train_rows)` uniformly chosen
/// training rows by `sign * level * range`, where `range` is the training
/// target range, `level ~ U[level_lo, level_hi]`, and the sign is a fair
/// coin. Returns the perturbed matrix and the true noisy row ids (for
/// evaluation only).
pub fn inject_noise(
    data: &DataMatrix,
    plan: &SplitPlan,
    fraction: f64,
    level_lo: f64,
    level_hi: f64,
    seed: u64,
) -> Result<(DataMatrix, Vec<usize>)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Config(format!(
            "noise fraction must be in [0, 1], got {fraction}"
        )));
    }
    if level_lo < 0.0 || level_hi < level_lo {
        return Err(Error::Config(format!(
            "noise levels must satisfy 0 <= lo <= hi, got ({level_lo}, {level_hi})"
        )));
    }
    let n_noise = (fraction * plan.train.len() as f64).round() as usize;
    let mut out = data.clone();
    if n_noise == 0 {
        return Ok((out, Vec::new()));
    }
    let targets: Vec<f64> = plan.train.iter().map(|&r| data.target_of(r)).collect();
    let range = targets.iter().cloned().fold(f64::MIN, f64::max)
        - targets.iter().cloned().fold(f64::MAX, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = plan.train.clone();
    candidates.shuffle(&mut rng);
    let mut noisy: Vec<usize> = candidates.into_iter().take(n_noise).collect();
    for &r in &noisy {
        let level: f64 = rng.random_range(level_lo..=level_hi);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        out.values[r][data.target] += sign * level * range;
    }
    noisy.sort_unstable();
    Ok((out, noisy))
}

/// Derives hypothesis class values for a column, either from an explicit
/// list or as quantile-bin midpoints over the observed training cells.
pub fn derive_hypothesis_classes(
    data: &DataMatrix,
    plan: &SplitPlan,
    column: usize,
    mode: &ClassMode,
) -> Result<HypothesisSpec> {
    let class_values = match mode {
        ClassMode::Explicit(values) => {
            let mut v = values.clone();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        }
        ClassMode::QuantileBins(k) => {
            if *k == 0 {
                return Err(Error::Config("requested zero hypothesis classes".into()));
            }
            let observed: Vec<f64> = plan
                .train
                .iter()
                .filter(|&&r| !data.missing[r][column])
                .map(|&r| data.values[r][column])
                .collect();
            if observed.is_empty() {
                return Err(Error::Data(format!(
                    "column {:?} has no observed training cells",
                    data.column_names[column]
                )));
            }
            let mut distinct = observed.clone();
            distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
            distinct.dedup();
            if distinct.len() < *k {
                return Err(Error::Data(format!(
                    "column {:?} has {} distinct observed values, fewer than {} bins",
                    data.column_names[column],
                    distinct.len(),
                    k
                )));
            }
            (0..*k)
                .map(|i| quantile(&observed, (i as f64 + 0.5) / *k as f64))
                .collect()
        }
    };
    if class_values.is_empty() {
        return Err(Error::Config("hypothesis class list is empty".into()));
    }
    for w in class_values.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Data(format!(
                "class values are not strictly increasing: {w:?}"
            )));
        }
    }
    Ok(HypothesisSpec {
        column,
        class_values,
    })
}

impl HypothesisSpec {
    /// Index of the class value nearest to `v`; ties go to the lower class.
    pub fn nearest_class(&self, v: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, &c) in self.class_values.iter().enumerate() {
            let d = (v - c).abs();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }

    /// Maps raw-unit class values into the standardized space of `data`.
    pub fn standardized_for(&self, data: &DataMatrix) -> HypothesisSpec {
        HypothesisSpec {
            column: self.column,
            class_values: self
                .class_values
                .iter()
                .map(|&v| data.standardize_value(self.column, v))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU64, Ordering};

    static COUNTER: AtomicU64 = AtomicU64::new(0);

    fn write_temp(content: &str) -> std::path::PathBuf {
        let id = COUNTER.fetch_add(1, Ordering::SeqCst);
        let path = std::env::temp_dir().join(format!(
            "ggh-data-test-{}-{id}.csv",
            std::process::id()
        ));
        std::fs::write(&path, content).unwrap();
        path
    }

    fn synthetic(n: usize, seed: u64) -> DataMatrix {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let y = 2.0 * a - b + 0.1;
            values.push(vec![a, b, y]);
        }
        DataMatrix {
            column_names: vec!["a".into(), "b".into(), "y".into()],
            missing: vec![vec![false; 3]; n],
            values,
            target: 2,
            standardization: None,
        }
    }

    #[test]
    fn load_csv_masks_empty_cells() {
        let path = write_temp("a,b,y\n1,2,3\n4,,6\n7,8,9\n");
        let d = load_csv(&path, "y").unwrap();
        let missing: usize = d.missing.iter().flatten().filter(|&&m| m).count();
        assert_eq!(missing, 1);
        assert!(d.missing[1][1]);
        assert_eq!(d.values[2][0], 7.0);
    }

    #[test]
    fn load_csv_rejects_bad_inputs() {
        let path = write_temp("a,b,y\n1,2,\n");
        assert!(load_csv(&path, "y").is_err());
        let path = write_temp("a,b,y\n1,x,3\n");
        assert!(load_csv(&path, "y").is_err());
        let path = write_temp("a,b,y\n1,2,3\n");
        assert!(load_csv(&path, "nope").is_err());
        let path = write_temp("a,b,y\n1,2,3\n4,5\n");
        assert!(load_csv(&path, "y").is_err());
        let path = write_temp("a,b,y\n1,NaN,3\n");
        assert!(load_csv(&path, "y").is_err());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = synthetic(100, 0);
        let p = split_dataset(&d, (0.7, 0.15, 0.15), 3).unwrap();
        assert_eq!(p.train.len(), 70);
        assert_eq!(p.validation.len(), 15);
        assert_eq!(p.test.len(), 15);
        let p2 = split_dataset(&d, (0.7, 0.15, 0.15), 3).unwrap();
        assert_eq!(p, p2);
        // Partition covers all rows exactly once.
        let mut all: Vec<usize> = p
            .train
            .iter()
            .chain(&p.validation)
            .chain(&p.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn different_seeds_give_different_plans() {
        let d = synthetic(100, 0);
        let base = split_dataset(&d, (0.7, 0.15, 0.15), 0).unwrap();
        let differing = (1..=10)
            .map(|s| split_dataset(&d, (0.7, 0.15, 0.15), s).unwrap())
            .filter(|p| p.train != base.train)
            .count();
        assert!(differing >= 9, "only {differing} of 10 seeds differed");
    }

    #[test]
    fn standardize_train_stats_and_inverse() {
        let d = synthetic(80, 1);
        let p = split_dataset(&d, (0.6, 0.2, 0.2), 5).unwrap();
        let s = standardize(&d, &p).unwrap();
        for c in 0..3 {
            let train: Vec<f64> = p.train.iter().map(|&r| s.values[r][c]).collect();
            let mean = train.iter().sum::<f64>() / train.len() as f64;
            let var = train.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / train.len() as f64;
            assert!(mean.abs() < 1e-12, "column {c} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-12, "column {c} std {}", var.sqrt());
        }
        // Test rows use training statistics, so their mean is generally nonzero.
        let test_mean: f64 = p.test.iter().map(|&r| s.values[r][0]).sum::<f64>()
            / p.test.len() as f64;
        assert!(test_mean.abs() > 1e-15);
        // Round trip.
        for r in 0..d.n_rows() {
            for c in 0..3 {
                let back = s.destandardize_value(c, s.values[r][c]);
                assert!((back - d.values[r][c]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn standardize_constant_column_maps_to_zero() {
        let mut d = synthetic(20, 2);
        for r in 0..20 {
            d.values[r][1] = 5.0;
        }
        let p = split_dataset(&d, (0.6, 0.2, 0.2), 5).unwrap();
        let s = standardize(&d, &p).unwrap();
        assert!(s.values.iter().all(|row| row[1] == 0.0));
    }

    #[test]
    fn mask_column_counts_and_untouched_partitions() {
        let d = synthetic(1072, 3); // 750 train rows at 0.7
        let p = split_dataset(&d, (0.6997, 0.15, 0.1503), 11).unwrap();
        assert_eq!(p.train.len(), 750);
        let m = mask_column(&d, &p, 0, 0.985, 17).unwrap();
        let masked: usize = p.train.iter().filter(|&&r| m.missing[r][0]).count();
        assert_eq!(masked, 739);
        for &r in p.validation.iter().chain(&p.test) {
            assert!(!m.missing[r][0]);
        }
        // Determinism.
        let m2 = mask_column(&d, &p, 0, 0.985, 17).unwrap();
        assert_eq!(m, m2);
        // Rate zero is the identity.
        let m0 = mask_column(&d, &p, 0, 0.0, 17).unwrap();
        assert_eq!(m0, d);
    }

    #[test]
    fn mask_column_rejects_target_and_full_mask() {
        let d = synthetic(10, 4);
        let p = split_dataset(&d, (0.6, 0.2, 0.2), 1).unwrap();
        assert!(mask_column(&d, &p, 2, 0.5, 0).is_err());
        // 6 train rows: rate 0.99 rounds to 6 masked = all of them.
        assert!(mask_column(&d, &p, 0, 0.99, 0).is_err());
    }

    #[test]
    fn inject_noise_bounds_and_identity() {
        let d = synthetic(1500, 5);
        let p = split_dataset(&d, (0.7, 0.15, 0.15), 2).unwrap();
        let (same, ids) = inject_noise(&d, &p, 0.0, 0.4, 0.6, 9).unwrap();
        assert_eq!(same, d);
        assert!(ids.is_empty());

        let (noised, ids) = inject_noise(&d, &p, 0.3, 0.4, 0.6, 9).unwrap();
        assert_eq!(ids.len(), (0.3f64 * 1050.0).round() as usize);
        let targets: Vec<f64> = p.train.iter().map(|&r| d.target_of(r)).collect();
        let range = targets.iter().cloned().fold(f64::MIN, f64::max)
            - targets.iter().cloned().fold(f64::MAX, f64::min);
        for &r in &ids {
            let delta = (noised.target_of(r) - d.target_of(r)).abs();
            assert!(
                delta >= 0.4 * range - 1e-9 && delta <= 0.6 * range + 1e-9,
                "delta {delta} outside [{}, {}]",
                0.4 * range,
                0.6 * range
            );
        }
        // Rows not listed are unchanged.
        for &r in &p.train {
            if !ids.contains(&r) {
                assert_eq!(noised.target_of(r), d.target_of(r));
            }
        }
        for &r in p.validation.iter().chain(&p.test) {
            assert_eq!(noised.target_of(r), d.target_of(r));
        }
    }

    #[test]
    fn hypothesis_classes_explicit_and_quantile() {
        let d = synthetic(60, 6);
        let p = split_dataset(&d, (0.6, 0.2, 0.2), 3).unwrap();
        let spec = derive_hypothesis_classes(
            &d,
            &p,
            0,
            &ClassMode::Explicit(vec![0.6, 0.2, 0.4]),
        )
        .unwrap();
        assert_eq!(spec.class_values, vec![0.2, 0.4, 0.6]);

        let spec = derive_hypothesis_classes(&d, &p, 0, &ClassMode::QuantileBins(4)).unwrap();
        assert_eq!(spec.class_values.len(), 4);
        for w in spec.class_values.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn hypothesis_classes_reject_degenerate_column() {
        let mut d = synthetic(30, 7);
        for r in 0..30 {
            d.values[r][0] = 1.0;
        }
        let p = split_dataset(&d, (0.6, 0.2, 0.2), 3).unwrap();
        let err = derive_hypothesis_classes(&d, &p, 0, &ClassMode::QuantileBins(2));
        assert!(err.is_err());
    }

    #[test]
    fn nearest_class_tie_goes_lower() {
        let spec = HypothesisSpec {
            column: 0,
            class_values: vec![0.2, 0.4, 0.6],
        };
        assert_eq!(spec.nearest_class(0.6), 2);
        assert_eq!(spec.nearest_class(0.3), 0); // exact midpoint of 0.2/0.4
        assert_eq!(spec.nearest_class(0.31), 1);
    }
}

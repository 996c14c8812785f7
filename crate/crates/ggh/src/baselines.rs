//! Reference methods the guided trainer is compared against: dropping
//! incomplete columns or rows, and light reimplementations of standard
//! imputers (mean, weighted kNN, matrix factorization, iterative
//! soft-thresholded SVD, chained regression).
//!
//! Imputers operate on the feature submatrix over all rows and never modify
//! an observed cell. The target column passes through untouched.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, SplitPlan};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, svd, Mat};

/// A completed matrix plus the record of which cells were filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputedMatrix {
    pub values: Vec<Vec<f64>>,
    pub method: String,
    /// True exactly where the input mask was true.
    pub imputed: Vec<Vec<bool>>,
}

impl ImputedMatrix {
    /// Completed copy of `original` with the mask cleared.
    pub fn into_data_matrix(self, original: &DataMatrix) -> DataMatrix {
        DataMatrix {
            column_names: original.column_names.clone(),
            missing: vec![vec![false; original.n_cols()]; original.n_rows()],
            values: self.values,
            target: original.target,
            standardization: original.standardization.clone(),
        }
    }

    /// Writes the completed values, plus an `.imputed-mask.csv` sidecar
    /// marking filled cells.
    pub fn write_csv(&self, data: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&data.column_names)?;
        for row in &self.values {
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;

        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("imputed");
        let sidecar = path.with_file_name(format!("{stem}.imputed-mask.csv"));
        let mut w = csv::Writer::from_path(sidecar)?;
        w.write_record(&data.column_names)?;
        for row in &self.imputed {
            w.write_record(row.iter().map(|b| if *b { "1" } else { "0" }))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn imputed_from(data: &DataMatrix, values: Vec<Vec<f64>>, method: &str) -> ImputedMatrix {
    ImputedMatrix {
        values,
        method: method.to_string(),
        imputed: data.missing.clone(),
    }
}

/// Drops every feature column that contains a missing cell.
pub fn complete_columns(data: &DataMatrix) -> Result<DataMatrix> {
    let keep: Vec<usize> = (0..data.n_cols())
        .filter(|&c| c == data.target || (0..data.n_rows()).all(|r| !data.missing[r][c]))
        .collect();
    if (0..data.n_rows()).any(|r| data.missing[r][data.target]) {
        return Err(Error::Data("target column has missing cells".into()));
    }
    if keep.len() < 2 {
        return Err(Error::Data(
            "dropping incomplete columns leaves no features".into(),
        ));
    }
    let target = keep.iter().position(|&c| c == data.target).unwrap();
    Ok(DataMatrix {
        column_names: keep.iter().map(|&c| data.column_names[c].clone()).collect(),
        values: data
            .values
            .iter()
            .map(|row| keep.iter().map(|&c| row[c]).collect())
            .collect(),
        missing: data
            .missing
            .iter()
            .map(|row| keep.iter().map(|&c| row[c]).collect())
            .collect(),
        target,
        standardization: data
            .standardization
            .as_ref()
            .map(|s| keep.iter().map(|&c| s[c]).collect()),
    })
}

/// Keeps only complete training rows; validation and test are untouched.
pub fn complete_rows(data: &DataMatrix, plan: &SplitPlan) -> Result<SplitPlan> {
    let train: Vec<usize> = plan
        .train
        .iter()
        .copied()
        .filter(|&r| data.is_row_complete(r))
        .collect();
    if train.is_empty() {
        return Err(Error::Data(
            "no complete training rows remain after filtering".into(),
        ));
    }
    Ok(SplitPlan {
        train,
        validation: plan.validation.clone(),
        test: plan.test.clone(),
        seed: plan.seed,
    })
}

fn column_means(data: &DataMatrix) -> Result<Vec<f64>> {
    let mut means = vec![0.0f64; data.n_cols()];
    for c in 0..data.n_cols() {
        let observed: Vec<f64> = (0..data.n_rows())
            .filter(|&r| !data.missing[r][c])
            .map(|r| data.values[r][c])
            .collect();
        if observed.is_empty() {
            return Err(Error::Data(format!(
                "column {:?} is entirely missing",
                data.column_names[c]
            )));
        }
        means[c] = observed.iter().sum::<f64>() / observed.len() as f64;
    }
    Ok(means)
}

/// Fills each missing cell with its column's observed mean.
pub fn mean_impute(data: &DataMatrix) -> Result<ImputedMatrix> {
    let means = column_means(data)?;
    let mut values = data.values.clone();
    for r in 0..data.n_rows() {
        for c in 0..data.n_cols() {
            if data.missing[r][c] {
                values[r][c] = means[c];
            }
        }
    }
    Ok(imputed_from(data, values, "mean"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnWeighting {
    Uniform,
    InverseDistance,
}

/// Distance over features observed in both rows, rescaled to the full
/// feature count; `None` when nothing is shared.
fn shared_feature_distance(
    data: &DataMatrix,
    a: usize,
    b: usize,
    feature_cols: &[usize],
) -> Option<f64> {
    let mut sum = 0.0;
    let mut shared = 0usize;
    for &c in feature_cols {
        if !data.missing[a][c] && !data.missing[b][c] {
            let d = data.values[a][c] - data.values[b][c];
            sum += d * d;
            shared += 1;
        }
    }
    (shared > 0).then(|| (sum * feature_cols.len() as f64 / shared as f64).sqrt())
}

/// k-nearest-neighbour imputation over shared observed features.
/// Distance ties break toward the lower row id.
pub fn knn_impute(data: &DataMatrix, k: usize, weighting: KnnWeighting) -> Result<ImputedMatrix> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let means = column_means(data)?;
    let feature_cols = data.feature_columns();
    let mut values = data.values.clone();
    for r in 0..data.n_rows() {
        for c in 0..data.n_cols() {
            if !data.missing[r][c] {
                continue;
            }
            let mut donors: Vec<(f64, usize)> = (0..data.n_rows())
                .filter(|&s| s != r && !data.missing[s][c])
                .filter_map(|s| shared_feature_distance(data, r, s, &feature_cols).map(|d| (d, s)))
                .collect();
            donors.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            donors.truncate(k);
            if donors.is_empty() {
                values[r][c] = means[c];
                continue;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for &(d, s) in &donors {
                let w = match weighting {
                    KnnWeighting::Uniform => 1.0,
                    KnnWeighting::InverseDistance => 1.0 / (d + 1e-12),
                };
                num += w * data.values[s][c];
                den += w;
            }
            values[r][c] = num / den;
        }
    }
    Ok(imputed_from(data, values, "knn"))
}

/// Observed feature cells as `(row, feature-index, value)`.
fn observed_feature_cells(data: &DataMatrix, feature_cols: &[usize]) -> Vec<(usize, usize, f64)> {
    let mut cells = Vec::new();
    for r in 0..data.n_rows() {
        for (fi, &c) in feature_cols.iter().enumerate() {
            if !data.missing[r][c] {
                cells.push((r, fi, data.values[r][c]));
            }
        }
    }
    cells
}

/// Stochastic-gradient factorization of the feature submatrix into two
/// low-rank factors; missing cells take the reconstructed value.
pub fn matrix_factorization_impute(
    data: &DataMatrix,
    rank: usize,
    learning_rate: f64,
    epochs: usize,
    regularization: f64,
    seed: u64,
) -> Result<ImputedMatrix> {
    if rank == 0 {
        return Err(Error::Config("rank must be at least 1".into()));
    }
    let feature_cols = data.feature_columns();
    let n = data.n_rows();
    let f = feature_cols.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 0.5 / (rank as f64).sqrt();
    let mut u: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..rank).map(|_| rng.random_range(-scale..scale)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..f)
        .map(|_| (0..rank).map(|_| rng.random_range(-scale..scale)).collect())
        .collect();
    let mut cells = observed_feature_cells(data, &feature_cols);
    for _ in 0..epochs {
        use rand::seq::SliceRandom;
        cells.shuffle(&mut rng);
        for &(r, fi, x) in &cells {
            let pred: f64 = u[r].iter().zip(&v[fi]).map(|(a, b)| a * b).sum();
            let err = x - pred;
            for d in 0..rank {
                let ur = u[r][d];
                let vf = v[fi][d];
                u[r][d] += learning_rate * (err * vf - regularization * ur);
                v[fi][d] += learning_rate * (err * ur - regularization * vf);
            }
        }
    }
    let mut values = data.values.clone();
    for r in 0..n {
        for (fi, &c) in feature_cols.iter().enumerate() {
            if data.missing[r][c] {
                values[r][c] = u[r].iter().zip(&v[fi]).map(|(a, b)| a * b).sum();
            }
        }
    }
    Ok(imputed_from(data, values, "matrix_factorization"))
}

/// Soft-impute outcome: the completed matrix and the per-iteration value of
/// the observed-cell objective `0.5*||P_obs(X - Z)||^2 + lambda*||Z||_*`.
#[derive(Debug, Clone)]
pub struct SoftImputeReport {
    pub imputed: ImputedMatrix,
    pub objective: Vec<f64>,
}

/// Iterative soft-thresholded SVD completion of the feature submatrix.
///
/// Each step refills missing cells from the current low-rank estimate,
/// takes an SVD, and shrinks the singular values by `lambda`. Convergence
/// at a small `lambda` is slow from a cold start, so the solve warm-starts
/// from a geometrically decreasing threshold sequence before iterating at
/// the requested `lambda`; the reported objective covers the final phase.
pub fn soft_impute(
    data: &DataMatrix,
    lambda: f64,
    max_iters: usize,
    tol: f64,
) -> Result<SoftImputeReport> {
    if lambda < 0.0 {
        return Err(Error::Config("lambda must be non-negative".into()));
    }
    let means = column_means(data)?;
    let feature_cols = data.feature_columns();
    let n = data.n_rows();
    let f = feature_cols.len();

    // Working matrix: observed cells fixed to the data, missing cells start
    // at the column mean.
    let mut z = Mat::zeros(n, f);
    for r in 0..n {
        for (fi, &c) in feature_cols.iter().enumerate() {
            z.set(
                r,
                fi,
                if data.missing[r][c] {
                    means[c]
                } else {
                    data.values[r][c]
                },
            );
        }
    }

    // One proximal step at threshold `thr`: returns the shrunk low-rank
    // matrix and its nuclear norm.
    let step = |z: &Mat, thr: f64| -> (Mat, f64) {
        let (u, s, v) = svd(z);
        let s_thr: Vec<f64> = s.iter().map(|&x| (x - thr).max(0.0)).collect();
        let mut next = Mat::zeros(n, f);
        for (kk, &sk) in s_thr.iter().enumerate() {
            if sk == 0.0 {
                continue;
            }
            for r in 0..n {
                let us = sk * u.get(r, kk);
                if us == 0.0 {
                    continue;
                }
                for cidx in 0..f {
                    let val = next.get(r, cidx) + us * v.get(cidx, kk);
                    next.set(r, cidx, val);
                }
            }
        }
        (next, s_thr.iter().sum())
    };
    let refill = |z: &mut Mat, low_rank: &Mat| {
        for r in 0..n {
            for (fi, &c) in feature_cols.iter().enumerate() {
                if data.missing[r][c] {
                    z.set(r, fi, low_rank.get(r, fi));
                } else {
                    z.set(r, fi, data.values[r][c]);
                }
            }
        }
    };

    // Warm start: anneal the threshold down to `lambda`.
    let (_, s0, _) = svd(&z);
    let mut thr = s0.first().copied().unwrap_or(0.0) / 4.0;
    while thr > lambda && thr > 1e-300 {
        for _ in 0..20 {
            let (low_rank, _) = step(&z, thr);
            refill(&mut z, &low_rank);
        }
        thr /= 2.0;
    }

    let mut objective = Vec::new();
    let mut low_rank = z.clone();
    for _ in 0..max_iters {
        let (next, nuclear) = step(&z, lambda);
        // Objective on the observed cells plus the nuclear norm.
        let mut fit = 0.0;
        for r in 0..n {
            for (fi, &c) in feature_cols.iter().enumerate() {
                if !data.missing[r][c] {
                    let d = data.values[r][c] - next.get(r, fi);
                    fit += d * d;
                }
            }
        }
        objective.push(0.5 * fit + lambda * nuclear);

        let mut diff = 0.0;
        for (a, b) in next.data.iter().zip(&low_rank.data) {
            diff += (a - b) * (a - b);
        }
        let rel = diff.sqrt() / low_rank.frobenius().max(1e-12);
        low_rank = next;
        refill(&mut z, &low_rank);
        if rel < tol {
            break;
        }
    }

    let mut values = data.values.clone();
    for r in 0..n {
        for (fi, &c) in feature_cols.iter().enumerate() {
            if data.missing[r][c] {
                values[r][c] = low_rank.get(r, fi);
            }
        }
    }
    Ok(SoftImputeReport {
        imputed: imputed_from(data, values, "soft_impute"),
        objective,
    })
}

/// Chained-regression outcome: the completed matrix and the largest change
/// of any imputed cell per round.
#[derive(Debug, Clone)]
pub struct IterativeImputeReport {
    pub imputed: ImputedMatrix,
    pub round_deltas: Vec<f64>,
}

/// Chained-regression imputation: starting from mean fill, each round
/// regresses every incomplete feature column on all other features (with
/// intercept) over the rows where it is observed, then refills its missing
/// cells from the fit. A single deterministic chain.
pub fn iterative_impute(data: &DataMatrix, rounds: usize) -> Result<IterativeImputeReport> {
    let means = column_means(data)?;
    let feature_cols = data.feature_columns();
    let mut values = data.values.clone();
    for r in 0..data.n_rows() {
        for &c in &feature_cols {
            if data.missing[r][c] {
                values[r][c] = means[c];
            }
        }
    }
    let incomplete: Vec<usize> = feature_cols
        .iter()
        .copied()
        .filter(|&c| (0..data.n_rows()).any(|r| data.missing[r][c]))
        .collect();

    let mut round_deltas = Vec::new();
    for _ in 0..rounds {
        let mut max_delta = 0.0f64;
        for &c in &incomplete {
            let predictors: Vec<usize> =
                feature_cols.iter().copied().filter(|&p| p != c).collect();
            let observed_rows: Vec<usize> = (0..data.n_rows())
                .filter(|&r| !data.missing[r][c])
                .collect();
            if observed_rows.len() <= predictors.len() {
                continue; // not enough rows to fit; keep current fill
            }
            let design: Vec<Vec<f64>> = observed_rows
                .iter()
                .map(|&r| {
                    let mut row: Vec<f64> =
                        predictors.iter().map(|&p| values[r][p]).collect();
                    row.push(1.0);
                    row
                })
                .collect();
            let rhs: Vec<f64> = observed_rows.iter().map(|&r| values[r][c]).collect();
            let coef = least_squares(&Mat::from_rows(&design), &rhs)?;
            for r in 0..data.n_rows() {
                if data.missing[r][c] {
                    let mut pred = coef[predictors.len()];
                    for (pi, &p) in predictors.iter().enumerate() {
                        pred += coef[pi] * values[r][p];
                    }
                    max_delta = max_delta.max((pred - values[r][c]).abs());
                    values[r][c] = pred;
                }
            }
        }
        round_deltas.push(max_delta);
    }
    Ok(IterativeImputeReport {
        imputed: imputed_from(data, values, "iterative"),
        round_deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn matrix(values: Vec<Vec<f64>>, missing: Vec<(usize, usize)>, target: usize) -> DataMatrix {
        let rows = values.len();
        let cols = values[0].len();
        let mut mask = vec![vec![false; cols]; rows];
        let mut vals = values;
        for &(r, c) in &missing {
            mask[r][c] = true;
            vals[r][c] = f64::NAN;
        }
        DataMatrix {
            column_names: (0..cols).map(|c| format!("c{c}")).collect(),
            values: vals,
            missing: mask,
            target,
            standardization: None,
        }
    }

    #[test]
    fn complete_columns_drops_masked_features() {
        let d = matrix(
            vec![
                vec![1.0, 2.0, 3.0, 4.0, 0.5],
                vec![5.0, 6.0, 7.0, 8.0, 1.5],
            ],
            vec![(0, 2)],
            4,
        );
        let out = complete_columns(&d).unwrap();
        assert_eq!(out.n_cols(), 4);
        assert_eq!(out.column_names, vec!["c0", "c1", "c3", "c4"]);
        assert_eq!(out.target, 3);
        assert_eq!(out.values[1], vec![5.0, 6.0, 8.0, 1.5]);

        // No missing cells: identity.
        let full = matrix(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![], 1);
        assert_eq!(complete_columns(&full).unwrap(), full);
    }

    #[test]
    fn complete_rows_filters_train_only() {
        let d = matrix(
            vec![
                vec![1.0, 0.1],
                vec![2.0, 0.2],
                vec![3.0, 0.3],
                vec![4.0, 0.4],
            ],
            vec![(1, 0)],
            1,
        );
        let plan = SplitPlan {
            train: vec![0, 1],
            validation: vec![2],
            test: vec![3],
            seed: 0,
        };
        let filtered = complete_rows(&d, &plan).unwrap();
        assert_eq!(filtered.train, vec![0]);
        assert_eq!(filtered.validation, vec![2]);
        assert_eq!(filtered.test, vec![3]);

        let all_missing = matrix(vec![vec![1.0, 0.1], vec![2.0, 0.2]], vec![(0, 0), (1, 0)], 1);
        let plan = SplitPlan {
            train: vec![0, 1],
            validation: vec![],
            test: vec![],
            seed: 0,
        };
        assert!(complete_rows(&all_missing, &plan).is_err());
    }

    #[test]
    fn mean_impute_fills_with_observed_mean() {
        let d = matrix(
            vec![vec![1.0, 9.0], vec![2.0, 9.0], vec![3.0, 9.0]],
            vec![(1, 0)],
            1,
        );
        let out = mean_impute(&d).unwrap();
        assert_eq!(out.values[1][0], 2.0);
        assert!(out.imputed[1][0]);
        assert_eq!(out.values[0][0], 1.0);
    }

    #[test]
    fn mean_impute_rejects_fully_missing_column() {
        let d = matrix(
            vec![vec![1.0, 9.0], vec![2.0, 9.0]],
            vec![(0, 0), (1, 0)],
            1,
        );
        assert!(mean_impute(&d).is_err());
    }

    #[test]
    fn knn_tie_breaks_toward_lower_row_id() {
        // Rows 1 and 2 are equidistant from row 0; k = 1 must take row 1.
        let d = matrix(
            vec![
                vec![f64::NAN, 0.0, 0.1],
                vec![10.0, 1.0, 0.2],
                vec![20.0, -1.0, 0.3],
            ],
            vec![(0, 0)],
            2,
        );
        let out = knn_impute(&d, 1, KnnWeighting::InverseDistance).unwrap();
        assert_eq!(out.values[0][0], 10.0);
    }

    #[test]
    fn knn_exact_duplicate_donates_its_value() {
        let d = matrix(
            vec![
                vec![f64::NAN, 0.5, 0.25, 0.0],
                vec![7.0, 0.5, 0.25, 0.0],
                vec![99.0, -4.0, 3.0, 0.0],
            ],
            vec![(0, 0)],
            3,
        );
        let out = knn_impute(&d, 1, KnnWeighting::InverseDistance).unwrap();
        assert_eq!(out.values[0][0], 7.0);
    }

    #[test]
    fn knn_beats_mean_on_linearly_structured_data() {
        // Feature 0 tracks feature 1 linearly; kNN exploits it, mean cannot.
        let mut values = Vec::new();
        for i in 0..20 {
            let t = i as f64 / 19.0 * 2.0 - 1.0;
            values.push(vec![3.0 * t, t, 0.0]);
        }
        let missing: Vec<(usize, usize)> = vec![(3, 0), (8, 0), (15, 0)];
        let truth = [values[3][0], values[8][0], values[15][0]];
        let d = matrix(values, missing.clone(), 2);
        let knn = knn_impute(&d, 2, KnnWeighting::InverseDistance).unwrap();
        let mean = mean_impute(&d).unwrap();
        let rmse = |m: &ImputedMatrix| {
            (missing
                .iter()
                .zip(&truth)
                .map(|(&(r, c), t)| (m.values[r][c] - t) * (m.values[r][c] - t))
                .sum::<f64>()
                / 3.0)
                .sqrt()
        };
        assert!(rmse(&knn) < rmse(&mean));
    }

    fn masked_rank_one(seed: u64) -> (DataMatrix, Vec<(usize, usize)>, Vec<Vec<f64>>) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let truth = synth::rank_one_matrix(20, 6, seed);
        let mut with_target: Vec<Vec<f64>> = truth
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r.push(0.0);
                r
            })
            .collect();
        let mut cells: Vec<(usize, usize)> = (0..20)
            .flat_map(|r| (0..6).map(move |c| (r, c)))
            .collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 1);
        cells.shuffle(&mut rng);
        let masked: Vec<(usize, usize)> = cells.into_iter().take(36).collect(); // 30%
        for &(r, c) in &masked {
            with_target[r][c] = f64::NAN;
        }
        let d = matrix(with_target, masked.clone(), 6);
        (d, masked, truth)
    }

    fn masked_rmse(
        m: &ImputedMatrix,
        masked: &[(usize, usize)],
        truth: &[Vec<f64>],
    ) -> f64 {
        (masked
            .iter()
            .map(|&(r, c)| {
                let d = m.values[r][c] - truth[r][c];
                d * d
            })
            .sum::<f64>()
            / masked.len() as f64)
            .sqrt()
    }

    #[test]
    fn matrix_factorization_recovers_rank_one() {
        let (d, masked, truth) = masked_rank_one(5);
        let out = matrix_factorization_impute(&d, 1, 0.05, 2000, 0.0, 7).unwrap();
        let rmse = masked_rmse(&out, &masked, &truth);
        assert!(rmse < 1e-2, "masked rmse {rmse}");
        // Deterministic under seed.
        let again = matrix_factorization_impute(&d, 1, 0.05, 2000, 0.0, 7).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn soft_impute_recovers_rank_one_and_objective_decreases() {
        let (d, masked, truth) = masked_rank_one(8);
        let report = soft_impute(&d, 1e-3, 3000, 1e-11).unwrap();
        let rmse = masked_rmse(&report.imputed, &masked, &truth);
        assert!(rmse < 1e-2, "masked rmse {rmse}");
        for w in report.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "objective rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn iterative_impute_recovers_exact_linear_dependence() {
        // c0 = 2*c1 - c2 + 0.3, with some c0 cells hidden.
        let mut values = Vec::new();
        for i in 0..30 {
            let a = (i as f64 * 0.37).sin();
            let b = (i as f64 * 0.11).cos();
            values.push(vec![2.0 * a - b + 0.3, a, b, 0.0]);
        }
        let missing = vec![(2usize, 0usize), (11, 0), (25, 0)];
        let truth: Vec<f64> = missing.iter().map(|&(r, _)| 2.0 * values[r][1] - values[r][2] + 0.3).collect();
        let d = matrix(values, missing.clone(), 3);
        let report = iterative_impute(&d, 3).unwrap();
        for (&(r, c), t) in missing.iter().zip(&truth) {
            assert!(
                (report.imputed.values[r][c] - t).abs() < 1e-8,
                "cell ({r},{c}) = {} vs {t}",
                report.imputed.values[r][c]
            );
        }
        // Later rounds change almost nothing once converged.
        assert!(report.round_deltas[2] <= report.round_deltas[0] + 1e-12);
    }

    #[test]
    fn zero_rounds_is_mean_fill() {
        let d = matrix(
            vec![vec![1.0, 5.0, 0.0], vec![f64::NAN, 6.0, 0.0], vec![3.0, 7.0, 0.0]],
            vec![(1, 0)],
            2,
        );
        let report = iterative_impute(&d, 0).unwrap();
        assert_eq!(report.imputed.values[1][0], 2.0);
        assert!(report.round_deltas.is_empty());
    }

    #[test]
    fn observed_cells_are_never_modified() {
        let (d, _, _) = masked_rank_one(13);
        let outputs = vec![
            mean_impute(&d).unwrap(),
            knn_impute(&d, 3, KnnWeighting::InverseDistance).unwrap(),
            matrix_factorization_impute(&d, 2, 0.05, 200, 1e-4, 3).unwrap(),
            soft_impute(&d, 0.1, 50, 1e-7).unwrap().imputed,
            iterative_impute(&d, 2).unwrap().imputed,
        ];
        for out in outputs {
            for r in 0..d.n_rows() {
                for c in 0..d.n_cols() {
                    if !d.missing[r][c] {
                        assert!(
                            out.values[r][c].to_bits() == d.values[r][c].to_bits(),
                            "method {} modified observed cell ({r},{c})",
                            out.method
                        );
                    }
                    assert_eq!(out.imputed[r][c], d.missing[r][c]);
                }
            }
        }
    }
}

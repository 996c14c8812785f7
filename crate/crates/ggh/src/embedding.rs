//! Plot-ready exports: 2D principal-component projections of enriched
//! gradients, correctness oracle labels (simulation mode), selection
//! frequency histograms, and the cluster-tightness statistic.

use std::path::Path;

use crate::data::DataMatrix;
use crate::enrichment::{EnrichedGradientSet, SampleKey};
use crate::error::{Error, Result};
use crate::hypotheses::ExpandedBatch;
use crate::linalg::{euclidean, percentile};
use crate::selection::SelectionHistory;

/// Top-two principal components of a vector set.
#[derive(Debug, Clone)]
pub struct ProjectedCloud {
    pub coords: Vec<[f64; 2]>,
    /// Component variances, non-increasing.
    pub variances: [f64; 2],
    /// Neighbors within the median pairwise distance, per point.
    pub density: Vec<usize>,
    /// All input vectors were identical; coordinates are zero.
    pub degenerate: bool,
}

fn power_iteration(cov: &[Vec<f64>], dim: usize) -> (Vec<f64>, f64) {
    // Deterministic start, extremely unlikely to be orthogonal to the
    // principal axis.
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 / (i + 1) as f64).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut eigenvalue = 0.0;
    for _ in 0..500 {
        let mut next = vec![0.0f64; dim];
        for (r, row) in cov.iter().enumerate() {
            let mut acc = 0.0;
            for (c, &m) in row.iter().enumerate() {
                acc += m * v[c];
            }
            next[r] = acc;
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return (v, 0.0);
        }
        next.iter_mut().for_each(|x| *x /= norm);
        let delta: f64 = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        eigenvalue = norm;
        if delta < 1e-13 {
            break;
        }
    }
    // Sign convention: the largest-magnitude loading is positive.
    let lead = (0..dim)
        .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
        .unwrap();
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    (v, eigenvalue)
}

/// Projects vectors onto their top-two principal components (power
/// iteration on the covariance of the centered set) and attaches a local
/// density count.
pub fn project_2d(vectors: &[Vec<f64>]) -> Result<ProjectedCloud> {
    if vectors.len() < 2 {
        return Err(Error::Data("projection needs at least two vectors".into()));
    }
    let n = vectors.len();
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::Shape("inconsistent vector dimensions".into()));
    }
    let mut mean = vec![0.0f64; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let total_var: f64 = centered
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        / (n - 1) as f64;
    if total_var < 1e-24 {
        return Ok(ProjectedCloud {
            coords: vec![[0.0, 0.0]; n],
            variances: [0.0, 0.0],
            density: vec![n - 1; n],
            degenerate: true,
        });
    }

    let mut cov = vec![vec![0.0f64; dim]; dim];
    for v in &centered {
        for i in 0..dim {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for j in i..dim {
                cov[i][j] += vi * v[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            cov[i][j] = cov[j][i];
        }
        for j in i..dim {
            cov[i][j] /= (n - 1) as f64;
            if j > i {
                cov[j][i] = cov[i][j];
            }
        }
    }

    let (axis1, var1) = power_iteration(&cov, dim);
    // Deflate and repeat.
    for i in 0..dim {
        for j in 0..dim {
            cov[i][j] -= var1 * axis1[i] * axis1[j];
        }
    }
    let (axis2, var2) = power_iteration(&cov, dim);

    let coords: Vec<[f64; 2]> = centered
        .iter()
        .map(|v| {
            let x: f64 = v.iter().zip(&axis1).map(|(a, b)| a * b).sum();
            let y: f64 = v.iter().zip(&axis2).map(|(a, b)| a * b).sum();
            [x, y]
        })
        .collect();

    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(euclidean(&coords[i], &coords[j]));
        }
    }
    let median = percentile(&dists, 50.0);
    let density: Vec<usize> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && euclidean(&coords[i], &coords[j]) <= median)
                .count()
        })
        .collect();

    Ok(ProjectedCloud {
        coords,
        variances: [var1, var2],
        density,
        degenerate: false,
    })
}

/// True per hypothesis row iff its class is the nearest class to the
/// unmasked value of its source row. `unmasked` must live in the same
/// (standardized) space as the batch's class values.
pub fn oracle_label(batch: &ExpandedBatch, unmasked: &DataMatrix) -> Vec<bool> {
    batch
        .hypothesis_rows
        .iter()
        .map(|h| {
            let truth = unmasked.values[h.source_row][batch.spec.column];
            batch.spec.nearest_class(truth) == h.class_id
        })
        .collect()
}

/// Binned selection-frequency distributions for correct and potentially
/// incorrect hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionHistogram {
    /// `bins + 1` edges spanning `[0, 1]`.
    pub bin_edges: Vec<f64>,
    pub count_correct: Vec<usize>,
    pub count_incorrect: Vec<usize>,
}

impl SelectionHistogram {
    pub fn total_correct(&self) -> usize {
        self.count_correct.iter().sum()
    }

    pub fn total_incorrect(&self) -> usize {
        self.count_incorrect.iter().sum()
    }

    /// Writes `bin_lo, bin_hi, count_correct, count_incorrect` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["bin_lo", "bin_hi", "count_correct", "count_incorrect"])?;
        for i in 0..self.count_correct.len() {
            w.write_record([
                format!("{}", self.bin_edges[i]),
                format!("{}", self.bin_edges[i + 1]),
                self.count_correct[i].to_string(),
                self.count_incorrect[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Histograms the selection frequency of every selectable hypothesis, split
/// by the oracle flag (`oracle[i]` aligns with hypothesis id `i`).
pub fn selection_histogram(
    history: &SelectionHistory,
    oracle: &[bool],
    bins: usize,
) -> Result<SelectionHistogram> {
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    if oracle.len() != history.records.len() {
        return Err(Error::Shape(format!(
            "oracle flags ({}) do not align with hypothesis records ({})",
            oracle.len(),
            history.records.len()
        )));
    }
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
    let mut correct = vec![0usize; bins];
    let mut incorrect = vec![0usize; bins];
    for r in &history.records {
        if r.excluded || r.ground_copy {
            continue;
        }
        let f = r.frequency();
        let bin = ((f * bins as f64).floor() as usize).min(bins - 1);
        if oracle[r.hyp_id] {
            correct[bin] += 1;
        } else {
            incorrect[bin] += 1;
        }
    }
    Ok(SelectionHistogram {
        bin_edges: edges,
        count_correct: correct,
        count_incorrect: incorrect,
    })
}

/// Mean selection frequency of correct vs potentially incorrect hypotheses.
pub fn mean_selection_frequencies(history: &SelectionHistory, oracle: &[bool]) -> (f64, f64) {
    let mut sum_c = 0.0;
    let mut n_c = 0usize;
    let mut sum_i = 0.0;
    let mut n_i = 0usize;
    for r in &history.records {
        if r.excluded || r.ground_copy {
            continue;
        }
        if oracle[r.hyp_id] {
            sum_c += r.frequency();
            n_c += 1;
        } else {
            sum_i += r.frequency();
            n_i += 1;
        }
    }
    (
        if n_c > 0 { sum_c / n_c as f64 } else { 0.0 },
        if n_i > 0 { sum_i / n_i as f64 } else { 0.0 },
    )
}

/// Mean distance from correct / potentially incorrect hypothesis vectors to
/// the centroid of the ground vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightnessStat {
    pub correct_mean_dist: f64,
    pub incorrect_mean_dist: f64,
}

/// Quantifies how much tighter correct hypotheses sit around the ground
/// truth than incorrect ones, in the enriched-gradient space.
pub fn tightness(set: &EnrichedGradientSet, oracle: &[bool]) -> Result<TightnessStat> {
    let dim = set.layout.total_dim();
    let mut centroid = vec![0.0f64; dim];
    let mut n_ground = 0usize;
    for v in set.ground_vectors() {
        for (c, x) in centroid.iter_mut().zip(&v.dims) {
            *c += x;
        }
        n_ground += 1;
    }
    if n_ground == 0 {
        return Err(Error::Data("tightness needs ground vectors".into()));
    }
    centroid.iter_mut().for_each(|c| *c /= n_ground as f64);

    let mut sum_c = 0.0;
    let mut n_c = 0usize;
    let mut sum_i = 0.0;
    let mut n_i = 0usize;
    for v in set.hypothesis_vectors() {
        let SampleKey::Hypothesis(id) = v.key else {
            continue;
        };
        let d = euclidean(&v.dims, &centroid);
        if *oracle.get(id).ok_or_else(|| {
            Error::Shape("oracle flags do not cover all hypothesis ids".into())
        })? {
            sum_c += d;
            n_c += 1;
        } else {
            sum_i += d;
            n_i += 1;
        }
    }
    if n_c == 0 || n_i == 0 {
        return Err(Error::Data(
            "tightness needs both correct and incorrect hypotheses".into(),
        ));
    }
    Ok(TightnessStat {
        correct_mean_dist: sum_c / n_c as f64,
        incorrect_mean_dist: sum_i / n_i as f64,
    })
}

/// Writes `x, y, row_id, class_id, label, density` for every enriched
/// vector. Labels use the oracle when provided, otherwise hypotheses are
/// `unlabelled`.
pub fn write_embeddings_csv(
    set: &EnrichedGradientSet,
    batch: &ExpandedBatch,
    oracle: Option<&[bool]>,
    path: impl AsRef<Path>,
) -> Result<ProjectedCloud> {
    let vectors: Vec<Vec<f64>> = set.vectors.iter().map(|v| v.dims.clone()).collect();
    let cloud = project_2d(&vectors)?;
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["x", "y", "row_id", "class_id", "label", "density"])?;
    for (i, v) in set.vectors.iter().enumerate() {
        let (row_id, class_id, label) = match v.key {
            SampleKey::Ground(row) => (row, String::new(), "ground".to_string()),
            SampleKey::Hypothesis(id) => {
                let h = &batch.hypothesis_rows[id];
                let label = match oracle {
                    Some(flags) => {
                        if flags[id] {
                            "correct".to_string()
                        } else {
                            "potentially_incorrect".to_string()
                        }
                    }
                    None => "unlabelled".to_string(),
                };
                (h.source_row, h.class_id.to_string(), label)
            }
        };
        w.write_record([
            format!("{}", cloud.coords[i][0]),
            format!("{}", cloud.coords[i][1]),
            row_id.to_string(),
            class_id,
            label,
            cloud.density[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{HypothesisSpec, SplitPlan};
    use crate::hypotheses::expand_hypotheses;
    use crate::selection::SelectionHistory;
    use crate::synth;

    #[test]
    fn component_variances_are_ordered_and_coords_centered() {
        let vectors = synth::gaussian_cloud(60, 5, 3);
        let cloud = project_2d(&vectors).unwrap();
        assert!(cloud.variances[0] >= cloud.variances[1]);
        let mean_x: f64 =
            cloud.coords.iter().map(|c| c[0]).sum::<f64>() / cloud.coords.len() as f64;
        let mean_y: f64 =
            cloud.coords.iter().map(|c| c[1]).sum::<f64>() / cloud.coords.len() as f64;
        assert!(mean_x.abs() < 1e-10);
        assert!(mean_y.abs() < 1e-10);
    }

    #[test]
    fn projecting_2d_data_preserves_pairwise_distances() {
        let vectors = synth::gaussian_cloud(40, 2, 7);
        let cloud = project_2d(&vectors).unwrap();
        for i in 0..vectors.len() {
            for j in (i + 1)..vectors.len() {
                let orig = euclidean(&vectors[i], &vectors[j]);
                let proj = euclidean(&cloud.coords[i], &cloud.coords[j]);
                assert!(
                    (orig - proj).abs() < 1e-8,
                    "distance {orig} became {proj}"
                );
            }
        }
    }

    #[test]
    fn identical_vectors_flag_degenerate() {
        let vectors = vec![vec![1.0, 2.0, 3.0]; 5];
        let cloud = project_2d(&vectors).unwrap();
        assert!(cloud.degenerate);
        assert!(cloud.coords.iter().all(|c| c == &[0.0, 0.0]));
    }

    #[test]
    fn projection_is_deterministic() {
        let vectors = synth::gaussian_cloud(30, 6, 11);
        let a = project_2d(&vectors).unwrap();
        let b = project_2d(&vectors).unwrap();
        assert_eq!(a.coords, b.coords);
    }

    fn oracle_fixture() -> (crate::data::DataMatrix, ExpandedBatch) {
        let mut data = synth::hypothesis_benchmark(10, 0);
        // Hide the level column in the first four training rows.
        let plan = SplitPlan {
            train: (0..8).collect(),
            validation: vec![8],
            test: vec![9],
            seed: 0,
        };
        let truth = data.clone();
        for r in 0..4 {
            data.missing[r][3] = true;
            data.values[r][3] = f64::NAN;
        }
        let spec = HypothesisSpec {
            column: 3,
            class_values: synth::BENCHMARK_LEVELS.to_vec(),
        };
        let batch = expand_hypotheses(&data, &plan, &spec, false).unwrap();
        (truth, batch)
    }

    #[test]
    fn oracle_marks_nearest_class_and_is_unique_per_source() {
        let (truth, batch) = oracle_fixture();
        let flags = oracle_label(&batch, &truth);
        assert_eq!(flags.len(), batch.hypothesis_rows.len());
        for &src in &batch.incomplete_rows {
            let correct: Vec<usize> = batch
                .hypothesis_rows
                .iter()
                .filter(|h| h.source_row == src)
                .filter(|h| flags[h.id])
                .map(|h| h.class_id)
                .collect();
            assert_eq!(correct.len(), 1, "source {src}");
            let expected = batch.spec.nearest_class(truth.values[src][3]);
            assert_eq!(correct[0], expected);
        }
    }

    #[test]
    fn oracle_nearest_rule_examples() {
        let spec = HypothesisSpec {
            column: 0,
            class_values: vec![0.2, 0.4, 0.6],
        };
        assert_eq!(spec.nearest_class(0.6), 2);
        let spec = HypothesisSpec {
            column: 0,
            class_values: vec![0.4, 0.6],
        };
        assert_eq!(spec.nearest_class(0.55), 1);
    }

    #[test]
    fn histogram_conserves_mass_and_zero_history_is_bin_zero() {
        let (truth, batch) = oracle_fixture();
        let flags = oracle_label(&batch, &truth);
        let history = SelectionHistory::new(&batch, 0);
        let hist = selection_histogram(&history, &flags, 10).unwrap();
        let n = batch.selectable().count();
        assert_eq!(hist.total_correct() + hist.total_incorrect(), n);
        // All-zero history: every frequency is 0, so everything is in bin 0.
        assert_eq!(
            hist.count_correct[0] + hist.count_incorrect[0],
            n
        );
        assert_eq!(hist.bin_edges.len(), 11);
        assert_eq!(hist.bin_edges[0], 0.0);
        assert_eq!(hist.bin_edges[10], 1.0);
    }

    #[test]
    fn histogram_full_frequency_lands_in_last_bin() {
        let (truth, batch) = oracle_fixture();
        let flags = oracle_label(&batch, &truth);
        let mut history = SelectionHistory::new(&batch, 0);
        for r in &mut history.records {
            r.epochs_eligible = 4;
            r.epochs_selected = 4;
        }
        let hist = selection_histogram(&history, &flags, 5).unwrap();
        let n = batch.selectable().count();
        assert_eq!(hist.count_correct[4] + hist.count_incorrect[4], n);
    }
}

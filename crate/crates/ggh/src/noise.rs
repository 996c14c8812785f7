//! Unsupervised noise filtering through enriched-gradient density.
//!
//! Training rows whose enriched gradients sit in low-density regions are
//! flagged by DBSCAN as candidate noise. Because genuine outliers (correct
//! but rare records) can land there too, a second stage retrains on all
//! rows and watches how fast each flagged row's enriched gradient
//! approaches the clean cluster: rows that contract inside the clean
//! radius are re-admitted as outliers, the rest stay noise.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, SplitPlan};
use crate::dbscan::{dbscan, k_distances, DbscanParams};
use crate::enrichment::{build_enriched, normalize_per_class, EnrichmentInput, SampleKey};
use crate::error::{Error, Result};
use crate::linalg::{euclidean, percentile};
use crate::metrics::{compute_metrics, Metrics};
use crate::model::{epoch_rng, train_sgd, MlpModel, TrainConfig};

/// Final status of one training row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowLabel {
    Clean,
    Noise,
    OutlierReadmitted,
}

/// Stage-1 and stage-2 labels for every training row.
#[derive(Debug, Clone)]
pub struct NoiseVerdict {
    /// Training rows, in plan order; all label vectors align with this.
    pub row_ids: Vec<usize>,
    pub stage1: Vec<RowLabel>,
    pub final_labels: Vec<RowLabel>,
    /// Stage-1 cluster id, `None` for density noise.
    pub cluster_ids: Vec<Option<usize>>,
    /// Distance-to-clean-centroid trace per flagged row (index-aligned;
    /// `None` for rows that were never flagged).
    pub trajectories: Vec<Option<Vec<f64>>>,
}

impl NoiseVerdict {
    pub fn rows_with(&self, label: RowLabel) -> Vec<usize> {
        self.row_ids
            .iter()
            .zip(&self.final_labels)
            .filter(|(_, &l)| l == label)
            .map(|(&r, _)| r)
            .collect()
    }

    /// Rows the filtered training stage keeps: clean plus re-admitted.
    pub fn kept_rows(&self) -> Vec<usize> {
        self.row_ids
            .iter()
            .zip(&self.final_labels)
            .filter(|(_, &l)| l != RowLabel::Noise)
            .map(|(&r, _)| r)
            .collect()
    }

    /// Writes `row id, stage-1 label, final label, trajectory summary`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record([
            "row_id",
            "stage1",
            "final",
            "dist_initial",
            "dist_final",
            "dist_min",
        ])?;
        let fmt = |l: RowLabel| match l {
            RowLabel::Clean => "clean",
            RowLabel::Noise => "noise",
            RowLabel::OutlierReadmitted => "outlier_readmitted",
        };
        for (i, &row) in self.row_ids.iter().enumerate() {
            let (d0, dn, dmin) = match &self.trajectories[i] {
                Some(t) if !t.is_empty() => (
                    format!("{}", t[0]),
                    format!("{}", t[t.len() - 1]),
                    format!("{}", t.iter().cloned().fold(f64::INFINITY, f64::min)),
                ),
                _ => (String::new(), String::new(), String::new()),
            };
            w.write_record([
                row.to_string(),
                fmt(self.stage1[i]).to_string(),
                fmt(self.final_labels[i]).to_string(),
                d0,
                dn,
                dmin,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Confusion counts against known noisy row ids (simulation mode).
    pub fn confusion(&self, true_noisy: &[usize]) -> NoiseConfusion {
        let mut c = NoiseConfusion::default();
        for (i, &row) in self.row_ids.iter().enumerate() {
            let flagged = self.final_labels[i] == RowLabel::Noise;
            let noisy = true_noisy.contains(&row);
            match (flagged, noisy) {
                (true, true) => c.true_positive += 1,
                (true, false) => c.false_positive += 1,
                (false, true) => c.false_negative += 1,
                (false, false) => c.true_negative += 1,
            }
        }
        c
    }
}

/// Confusion matrix for noise flagging, positive = flagged noise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl NoiseConfusion {
    pub fn precision(&self) -> Option<f64> {
        let flagged = self.true_positive + self.false_positive;
        (flagged > 0).then(|| self.true_positive as f64 / flagged as f64)
    }

    pub fn accuracy(&self) -> f64 {
        let total =
            self.true_positive + self.false_positive + self.true_negative + self.false_negative;
        (self.true_positive + self.true_negative) as f64 / total as f64
    }
}

/// Enriched gradient (`gradient ++ input ++ loss`) for every given row,
/// z-scored per dimension over the whole set.
pub fn row_enriched_vectors(
    model: &MlpModel,
    data: &DataMatrix,
    rows: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for &r in rows {
        x.push(data.features_of(r, None)?);
        y.push(data.target_of(r));
    }
    let batch = model.forward_batch(&x, &y, rows)?;
    let items: Vec<EnrichmentInput> = rows
        .iter()
        .enumerate()
        .map(|(i, &r)| EnrichmentInput {
            key: SampleKey::Ground(r),
            class_id: None,
            gradient: &batch.penultimate[i],
            input: &x[i],
            loss: batch.losses[i],
        })
        .collect();
    // Loss always enriches here; the whole set forms one normalization group.
    let set = build_enriched(&items, 0, 0)?;
    let normalized = normalize_per_class(&set);
    Ok(normalized.vectors.into_iter().map(|v| v.dims).collect())
}

/// Stage 1: density-label every training row's enriched gradient.
///
/// Without explicit `cfg.dbscan` params the k-distance heuristic picks
/// epsilon at `cfg.epsilon_percentile`. Errors when every point comes out
/// as noise, with k-distance percentiles in the message to guide an epsilon
/// choice.
pub fn label_noise(
    model: &MlpModel,
    data: &DataMatrix,
    plan: &SplitPlan,
    cfg: &NoiseFilterConfig,
) -> Result<(NoiseVerdict, DbscanParams)> {
    let rows = plan.train.clone();
    let vectors = row_enriched_vectors(model, data, &rows)?;
    let params = match cfg.dbscan {
        Some(p) => p,
        // Default neighbour floor follows the table width, not the enriched
        // dimension (which would dwarf the row count).
        None => DbscanParams::from_k_distance_at(
            &vectors,
            5.max(data.n_cols()),
            cfg.epsilon_percentile,
        )?,
    };
    let labels = dbscan(&vectors, &params)?;
    if labels.iter().all(|l| l.is_noise()) {
        let kd = k_distances(&vectors, params.min_pts);
        return Err(Error::Run(format!(
            "dbscan labelled every row noise (epsilon {} too small); \
             k-distance percentiles: p10={:.4} p50={:.4} p90={:.4}",
            params.epsilon,
            percentile(&kd, 10.0),
            percentile(&kd, 50.0),
            percentile(&kd, 90.0),
        )));
    }
    let stage1: Vec<RowLabel> = labels
        .iter()
        .map(|l| if l.is_noise() { RowLabel::Noise } else { RowLabel::Clean })
        .collect();
    let verdict = NoiseVerdict {
        row_ids: rows,
        final_labels: stage1.clone(),
        stage1,
        cluster_ids: labels.iter().map(|l| l.cluster()).collect(),
        trajectories: vec![None; labels.len()],
    };
    Ok((verdict, params))
}

/// Stage 2: retrain on all rows and re-admit flagged rows whose enriched
/// gradient contracts inside the clean cluster's 90th-percentile radius.
///
/// The model should already be converged on the filtered rows. Distances are
/// measured before any extra epoch and after each one.
pub fn disambiguate_outliers(
    model: &MlpModel,
    data: &DataMatrix,
    stage1: &NoiseVerdict,
    extra_epochs: usize,
    train: &TrainConfig,
) -> Result<NoiseVerdict> {
    let flagged: Vec<usize> = (0..stage1.row_ids.len())
        .filter(|&i| stage1.stage1[i] == RowLabel::Noise)
        .collect();
    let mut out = stage1.clone();
    if flagged.is_empty() {
        return Ok(out);
    }
    let clean: Vec<usize> = (0..stage1.row_ids.len())
        .filter(|&i| stage1.stage1[i] == RowLabel::Clean)
        .collect();

    let rows = &stage1.row_ids;
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for &r in rows {
        x.push(data.features_of(r, None)?);
        y.push(data.target_of(r));
    }
    let weights = vec![1.0; rows.len()];

    let mut work = model.clone();
    let mut traces: Vec<Vec<f64>> = vec![Vec::new(); flagged.len()];
    let mut readmitted = vec![false; flagged.len()];
    for step in 0..=extra_epochs {
        if step > 0 {
            let mut rng = epoch_rng(train.seed, usize::MAX - step);
            work.sgd_epoch(
                &x,
                &y,
                &weights,
                train.batch_size,
                train.learning_rate,
                &mut rng,
            )?;
        }
        let vectors = row_enriched_vectors(&work, data, rows)?;
        let dim = vectors[0].len();
        let mut centroid = vec![0.0f64; dim];
        for &i in &clean {
            for (c, v) in centroid.iter_mut().zip(&vectors[i]) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= clean.len() as f64;
        }
        let clean_dists: Vec<f64> = clean
            .iter()
            .map(|&i| euclidean(&vectors[i], &centroid))
            .collect();
        let radius = percentile(&clean_dists, 90.0);
        for (t, &i) in flagged.iter().enumerate() {
            let d = euclidean(&vectors[i], &centroid);
            traces[t].push(d);
            if d <= radius {
                readmitted[t] = true;
            }
        }
    }
    for (t, &i) in flagged.iter().enumerate() {
        out.trajectories[i] = Some(traces[t].clone());
        out.final_labels[i] = if readmitted[t] {
            RowLabel::OutlierReadmitted
        } else {
            RowLabel::Noise
        };
    }
    Ok(out)
}

/// Configuration for the full filtering pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseFilterConfig {
    /// Mini-batch epochs on all rows before stage-1 labelling.
    pub warmup_epochs: usize,
    /// Trainer for the convergence stages.
    pub train: TrainConfig,
    /// All-data epochs in the disambiguation stage.
    pub extra_epochs: usize,
    /// `None` = k-distance heuristic.
    pub dbscan: Option<DbscanParams>,
    /// Percentile of the k-distance distribution the heuristic epsilon sits
    /// at. The 90th keeps at most ~10% of rows flaggable; push it down when
    /// a larger noise share is expected.
    pub epsilon_percentile: f64,
}

impl Default for NoiseFilterConfig {
    fn default() -> Self {
        NoiseFilterConfig {
            warmup_epochs: 60,
            train: TrainConfig::default(),
            extra_epochs: 50,
            dbscan: None,
            epsilon_percentile: 90.0,
        }
    }
}

/// Everything the pipeline produces.
#[derive(Debug, Clone)]
pub struct NoiseFilterOutcome {
    pub model: MlpModel,
    pub verdict: NoiseVerdict,
    pub params: DbscanParams,
    pub test_metrics: Metrics,
}

/// Full pipeline: warmup-train on everything, density-label, converge on the
/// filtered rows, disambiguate outliers, converge on clean plus re-admitted,
/// and score the test partition.
pub fn noise_filtered_train(
    data: &DataMatrix,
    plan: &SplitPlan,
    cfg: &NoiseFilterConfig,
) -> Result<NoiseFilterOutcome> {
    let (x_all, y_all) = data.complete_xy(&plan.train)?;
    let (val_x, val_y) = data.complete_xy(&plan.validation)?;

    // Warmup model sees every row.
    let mut dims = vec![x_all[0].len()];
    dims.extend_from_slice(&cfg.train.hidden_dims);
    dims.push(1);
    let mut warm = MlpModel::init(&dims, cfg.train.seed)?;
    let all_weights = vec![1.0; x_all.len()];
    for epoch in 0..cfg.warmup_epochs {
        let mut rng = epoch_rng(cfg.train.seed, epoch);
        warm.sgd_epoch(
            &x_all,
            &y_all,
            &all_weights,
            cfg.train.batch_size,
            cfg.train.learning_rate,
            &mut rng,
        )?;
    }

    let (stage1, params) = label_noise(&warm, data, plan, cfg)?;

    let clean_rows = stage1.kept_rows();
    let (cx, cy) = data.complete_xy(&clean_rows)?;
    let filtered = train_sgd(&cx, &cy, &val_x, &val_y, &cfg.train)?;

    let verdict = disambiguate_outliers(
        &filtered.model,
        data,
        &stage1,
        cfg.extra_epochs,
        &cfg.train,
    )?;

    let kept = verdict.kept_rows();
    let (kx, ky) = data.complete_xy(&kept)?;
    let final_run = train_sgd(&kx, &ky, &val_x, &val_y, &cfg.train)?;

    let (tx, ty) = data.complete_xy(&plan.test)?;
    let preds: Vec<f64> = tx.iter().map(|r| final_run.model.predict(r)).collect();
    let test_metrics = compute_metrics(&preds, &ty)?;

    Ok(NoiseFilterOutcome {
        model: final_run.model,
        verdict,
        params,
        test_metrics,
    })
}

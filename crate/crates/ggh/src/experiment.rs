//! Multi-seed experiment orchestration: simulators, method roster, metric
//! aggregation, and report emission.
//!
//! One experiment = one dataset, one simulation mode (masking or label
//! noise), and a roster of methods. Each of `runs` repetitions derives its
//! own seed from the base seed, re-splits, re-simulates, trains every
//! method with early stopping on validation MSE, and scores the test
//! partition. The report aggregates mean and standard deviation per method.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    complete_columns, complete_rows, iterative_impute, knn_impute, matrix_factorization_impute,
    mean_impute, soft_impute, KnnWeighting,
};
use crate::data::{
    derive_hypothesis_classes, inject_noise, load_csv, mask_column, split_dataset, standardize,
    write_csv, ClassMode, DataMatrix, HypothesisSpec, SplitPlan,
};
use crate::embedding::{
    mean_selection_frequencies, oracle_label, selection_histogram, tightness,
    write_embeddings_csv,
};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, Metrics};
use crate::model::{train_sgd, TrainConfig};
use crate::noise::{noise_filtered_train, NoiseFilterConfig};
use crate::selection::{ggh_train, GghConfig};

/// Everything a method comparison needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub target_column: String,
    pub mode: ExperimentMode,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default = "default_split")]
    pub split: (f64, f64, f64),
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub ggh: GghConfig,
    #[serde(default)]
    pub noise_filter: NoiseFilterConfig,
    #[serde(default)]
    pub imputers: ImputerParams,
}

fn default_split() -> (f64, f64, f64) {
    (0.7, 0.15, 0.15)
}

fn default_runs() -> usize {
    15
}

/// Exactly one simulator is active per experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    Imputation {
        masked_column: String,
        missing_rate: f64,
        classes: ClassMode,
    },
    Noise {
        fraction: f64,
        level_lo: f64,
        level_hi: f64,
    },
}

impl ExperimentMode {
    pub fn is_imputation(&self) -> bool {
        matches!(self, ExperimentMode::Imputation { .. })
    }
}

/// Hyperparameters of the light imputers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ImputerParams {
    pub knn_k: usize,
    pub knn_weighting: KnnWeighting,
    pub mf_rank: usize,
    pub mf_learning_rate: f64,
    pub mf_epochs: usize,
    pub mf_regularization: f64,
    pub soft_lambda: f64,
    pub soft_max_iters: usize,
    pub soft_tol: f64,
    pub iterative_rounds: usize,
}

impl Default for ImputerParams {
    fn default() -> Self {
        ImputerParams {
            knn_k: 5,
            knn_weighting: KnnWeighting::InverseDistance,
            mf_rank: 2,
            mf_learning_rate: 0.02,
            mf_epochs: 300,
            mf_regularization: 1e-4,
            soft_lambda: 0.1,
            soft_max_iters: 200,
            soft_tol: 1e-7,
            iterative_rounds: 5,
        }
    }
}

/// Roster entries. The noise-mode methods are only valid with the noise
/// simulator and vice versa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CompleteColumns,
    CompleteRows,
    MeanImpute,
    KnnImpute,
    MatrixFactorization,
    SoftImpute,
    IterativeImpute,
    BestImputation,
    Ggh,
    CompleteData,
    CompletePlusNoise,
    GghNoiseFilter,
    CleanData,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::CompleteColumns => "complete-columns",
            Method::CompleteRows => "complete-rows",
            Method::MeanImpute => "mean-impute",
            Method::KnnImpute => "knn-impute",
            Method::MatrixFactorization => "matrix-factorization",
            Method::SoftImpute => "soft-impute",
            Method::IterativeImpute => "iterative-impute",
            Method::BestImputation => "best-imputation",
            Method::Ggh => "ggh",
            Method::CompleteData => "complete-data",
            Method::CompletePlusNoise => "complete-plus-noise",
            Method::GghNoiseFilter => "ggh-noise-filter",
            Method::CleanData => "clean-data",
        }
    }

    pub fn is_imputer(&self) -> bool {
        matches!(
            self,
            Method::MeanImpute
                | Method::KnnImpute
                | Method::MatrixFactorization
                | Method::SoftImpute
                | Method::IterativeImpute
        )
    }

    fn for_noise_mode(&self) -> bool {
        matches!(
            self,
            Method::CompletePlusNoise | Method::GghNoiseFilter | Method::CleanData
        )
    }

    /// Default Table-style rosters per mode.
    pub fn default_roster(mode: &ExperimentMode) -> Vec<Method> {
        match mode {
            ExperimentMode::Imputation { .. } => vec![
                Method::CompleteColumns,
                Method::CompleteRows,
                Method::BestImputation,
                Method::Ggh,
                Method::CompleteData,
            ],
            ExperimentMode::Noise { .. } => vec![
                Method::CompletePlusNoise,
                Method::GghNoiseFilter,
                Method::CleanData,
            ],
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        self.ggh.validate()?;
        let roster = self.roster();
        for m in &roster {
            if m.for_noise_mode() == self.mode.is_imputation() {
                return Err(Error::Config(format!(
                    "method {} does not fit the configured simulation mode",
                    m.name()
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for m in &roster {
            if !seen.insert(*m) {
                return Err(Error::Config(format!(
                    "method {} appears twice in the roster",
                    m.name()
                )));
            }
        }
        match &self.mode {
            ExperimentMode::Imputation { missing_rate, .. } => {
                if !(0.0..1.0).contains(missing_rate) {
                    return Err(Error::Config(format!(
                        "missing rate must be in [0, 1), got {missing_rate}"
                    )));
                }
            }
            ExperimentMode::Noise {
                fraction,
                level_lo,
                level_hi,
            } => {
                if !(0.0..=1.0).contains(fraction) || *level_lo < 0.0 || level_hi < level_lo {
                    return Err(Error::Config("invalid noise parameters".into()));
                }
            }
        }
        Ok(())
    }

    pub fn roster(&self) -> Vec<Method> {
        if self.methods.is_empty() {
            Method::default_roster(&self.mode)
        } else {
            self.methods.clone()
        }
    }

    /// Per-run seed derivation: split, simulator, and model seeds are
    /// distinct deterministic streams.
    fn run_seeds(&self, run: usize) -> RunSeeds {
        let base = self.base_seed.wrapping_add(run as u64);
        RunSeeds {
            split: base,
            simulate: base.wrapping_mul(2).wrapping_add(1),
            model: base.wrapping_mul(3).wrapping_add(7),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RunSeeds {
    split: u64,
    simulate: u64,
    model: u64,
}

/// One method's score on one run.
#[derive(Debug, Clone, Serialize)]
pub struct MethodRun {
    pub run: usize,
    pub seed: u64,
    pub metrics: Metrics,
    /// Extra context, e.g. which imputer "best-imputation" picked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Aggregated method row.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub runs: Vec<MethodRun>,
    pub r2_mean: Option<f64>,
    pub r2_std: Option<f64>,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub mae_mean: f64,
    pub mae_std: f64,
    /// Fewer completed runs than requested.
    pub incomplete: bool,
}

/// A failed run and why.
#[derive(Debug, Clone, Serialize)]
pub struct RunDiagnostic {
    pub run: usize,
    pub error: String,
}

/// Whole-experiment result.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub dataset: PathBuf,
    pub mode: String,
    pub requested_runs: usize,
    pub methods: Vec<MethodSummary>,
    pub diagnostics: Vec<RunDiagnostic>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Trains on the plan's train rows and scores the test partition; returns
/// the metrics and the best validation MSE (used to pick the best imputer).
fn fit_and_score(
    data: &DataMatrix,
    plan: &SplitPlan,
    train_cfg: &TrainConfig,
) -> Result<(Metrics, f64)> {
    let (x, y) = data.complete_xy(&plan.train)?;
    let (vx, vy) = data.complete_xy(&plan.validation)?;
    let outcome = train_sgd(&x, &y, &vx, &vy, train_cfg)?;
    let (tx, ty) = data.complete_xy(&plan.test)?;
    let preds: Vec<f64> = tx.iter().map(|r| outcome.model.predict(r)).collect();
    let metrics = compute_metrics(&preds, &ty)?;
    Ok((metrics, outcome.val_losses[outcome.best_epoch]))
}

/// Prepared state for one imputation-mode run.
struct ImputationRun {
    masked_std: DataMatrix,
    plan: SplitPlan,
    spec: HypothesisSpec,
    /// Unmasked data mapped into the masked variant's standardized space.
    truth_std: DataMatrix,
}

fn prepare_imputation_run(
    raw: &DataMatrix,
    cfg: &ExperimentConfig,
    seeds: RunSeeds,
) -> Result<ImputationRun> {
    let ExperimentMode::Imputation {
        masked_column,
        missing_rate,
        classes,
    } = &cfg.mode
    else {
        return Err(Error::Config("not an imputation-mode config".into()));
    };
    let column = raw
        .column_index(masked_column)
        .ok_or_else(|| Error::Data(format!("masked column {masked_column:?} not found")))?;
    let plan = split_dataset(raw, cfg.split, seeds.split)?;
    let masked = mask_column(raw, &plan, column, *missing_rate, seeds.simulate)?;
    let masked_std = standardize(&masked, &plan)?;
    let spec = match classes {
        ClassMode::Explicit(values) => HypothesisSpec {
            column,
            class_values: values.clone(),
        }
        .standardized_for(&masked_std),
        ClassMode::QuantileBins(_) => {
            derive_hypothesis_classes(&masked_std, &plan, column, classes)?
        }
    };
    // Truth in the masked variant's space, for oracle labelling.
    let mut truth_std = raw.clone();
    let stats = masked_std.standardization.as_ref().unwrap();
    for row in &mut truth_std.values {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (*v - stats[c].mean) / stats[c].std;
        }
    }
    truth_std.standardization = Some(stats.clone());
    Ok(ImputationRun {
        masked_std,
        plan,
        spec,
        truth_std,
    })
}

fn imputed_variant(
    method: Method,
    data: &DataMatrix,
    params: &ImputerParams,
    seed: u64,
) -> Result<DataMatrix> {
    let imputed = match method {
        Method::MeanImpute => mean_impute(data)?,
        Method::KnnImpute => knn_impute(data, params.knn_k, params.knn_weighting)?,
        Method::MatrixFactorization => matrix_factorization_impute(
            data,
            params.mf_rank,
            params.mf_learning_rate,
            params.mf_epochs,
            params.mf_regularization,
            seed,
        )?,
        Method::SoftImpute => {
            soft_impute(data, params.soft_lambda, params.soft_max_iters, params.soft_tol)?.imputed
        }
        Method::IterativeImpute => iterative_impute(data, params.iterative_rounds)?.imputed,
        other => return Err(Error::Config(format!("{} is not an imputer", other.name()))),
    };
    Ok(imputed.into_data_matrix(data))
}

const ALL_IMPUTERS: [Method; 5] = [
    Method::MeanImpute,
    Method::KnnImpute,
    Method::MatrixFactorization,
    Method::SoftImpute,
    Method::IterativeImpute,
];

fn run_one_imputation(
    raw: &DataMatrix,
    cfg: &ExperimentConfig,
    run: usize,
) -> Result<Vec<(Method, MethodRun)>> {
    let seeds = cfg.run_seeds(run);
    let prep = prepare_imputation_run(raw, cfg, seeds)?;
    let train_cfg = TrainConfig {
        seed: seeds.model,
        ..cfg.train.clone()
    };
    let roster = cfg.roster();

    // Imputer scores are shared between their own rows and best-imputation.
    let need_imputers: Vec<Method> = if roster.contains(&Method::BestImputation) {
        let in_roster: Vec<Method> = roster.iter().copied().filter(Method::is_imputer).collect();
        if in_roster.is_empty() {
            ALL_IMPUTERS.to_vec()
        } else {
            in_roster
        }
    } else {
        roster.iter().copied().filter(Method::is_imputer).collect()
    };
    let mut imputer_scores: Vec<(Method, Metrics, f64)> = Vec::new();
    for m in &need_imputers {
        let variant = imputed_variant(*m, &prep.masked_std, &cfg.imputers, seeds.simulate)?;
        let (metrics, val) = fit_and_score(&variant, &prep.plan, &train_cfg)?;
        imputer_scores.push((*m, metrics, val));
    }

    let mut out = Vec::new();
    for method in roster {
        let (metrics, detail) = match method {
            Method::CompleteColumns => {
                let variant = complete_columns(&prep.masked_std)?;
                (fit_and_score(&variant, &prep.plan, &train_cfg)?.0, None)
            }
            Method::CompleteRows => {
                let filtered = complete_rows(&prep.masked_std, &prep.plan)?;
                (fit_and_score(&prep.masked_std, &filtered, &train_cfg)?.0, None)
            }
            m if m.is_imputer() => {
                let (_, metrics, _) = imputer_scores
                    .iter()
                    .find(|(im, _, _)| *im == m)
                    .expect("imputer scored above");
                (*metrics, None)
            }
            Method::BestImputation => {
                let (best, metrics, _) = imputer_scores
                    .iter()
                    .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
                    .ok_or_else(|| Error::Run("no imputers available".into()))?;
                (*metrics, Some(best.name().to_string()))
            }
            Method::Ggh => {
                let ggh_cfg = GghConfig {
                    seed: seeds.model,
                    ..cfg.ggh.clone()
                };
                let outcome = ggh_train(&prep.masked_std, &prep.plan, &prep.spec, &ggh_cfg)?;
                let (tx, ty) = prep.masked_std.complete_xy(&prep.plan.test)?;
                let preds: Vec<f64> = tx.iter().map(|r| outcome.model.predict(r)).collect();
                (compute_metrics(&preds, &ty)?, None)
            }
            Method::CompleteData => {
                let full_std = standardize(raw, &prep.plan)?;
                (fit_and_score(&full_std, &prep.plan, &train_cfg)?.0, None)
            }
            other => {
                return Err(Error::Config(format!(
                    "method {} is not valid in imputation mode",
                    other.name()
                )))
            }
        };
        out.push((
            method,
            MethodRun {
                run,
                seed: seeds.split,
                metrics,
                detail,
            },
        ));
    }
    Ok(out)
}

fn run_one_noise(
    raw: &DataMatrix,
    cfg: &ExperimentConfig,
    run: usize,
) -> Result<Vec<(Method, MethodRun)>> {
    let ExperimentMode::Noise {
        fraction,
        level_lo,
        level_hi,
    } = &cfg.mode
    else {
        return Err(Error::Config("not a noise-mode config".into()));
    };
    let seeds = cfg.run_seeds(run);
    let plan = split_dataset(raw, cfg.split, seeds.split)?;
    let (noised, noisy_ids) =
        inject_noise(raw, &plan, *fraction, *level_lo, *level_hi, seeds.simulate)?;
    let noised_std = standardize(&noised, &plan)?;
    let clean_std = standardize(raw, &plan)?;
    let train_cfg = TrainConfig {
        seed: seeds.model,
        ..cfg.train.clone()
    };

    let mut out = Vec::new();
    for method in cfg.roster() {
        let (metrics, detail) = match method {
            Method::CompletePlusNoise => {
                (fit_and_score(&noised_std, &plan, &train_cfg)?.0, None)
            }
            Method::GghNoiseFilter => {
                let nf_cfg = NoiseFilterConfig {
                    train: TrainConfig {
                        seed: seeds.model,
                        ..cfg.noise_filter.train.clone()
                    },
                    ..cfg.noise_filter.clone()
                };
                let outcome = noise_filtered_train(&noised_std, &plan, &nf_cfg)?;
                let confusion = outcome.verdict.confusion(&noisy_ids);
                let detail = format!(
                    "flagged={} precision={:.3} accuracy={:.3}",
                    confusion.true_positive + confusion.false_positive,
                    confusion.precision().unwrap_or(f64::NAN),
                    confusion.accuracy()
                );
                (outcome.test_metrics, Some(detail))
            }
            Method::CleanData => (fit_and_score(&clean_std, &plan, &train_cfg)?.0, None),
            other => {
                return Err(Error::Config(format!(
                    "method {} is not valid in noise mode",
                    other.name()
                )))
            }
        };
        out.push((
            method,
            MethodRun {
                run,
                seed: seeds.split,
                metrics,
                detail,
            },
        ));
    }
    Ok(out)
}

/// Runs the full experiment. Individual run failures are recorded as
/// diagnostics; surviving runs still aggregate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let raw = load_csv(&cfg.dataset, &cfg.target_column)?;
    let results: Vec<std::result::Result<Vec<(Method, MethodRun)>, String>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let r = if cfg.mode.is_imputation() {
                run_one_imputation(&raw, cfg, run)
            } else {
                run_one_noise(&raw, cfg, run)
            };
            r.map_err(|e| e.to_string())
        })
        .collect();

    let mut diagnostics = Vec::new();
    let mut per_method: Vec<(Method, Vec<MethodRun>)> =
        cfg.roster().into_iter().map(|m| (m, Vec::new())).collect();
    for (run, result) in results.into_iter().enumerate() {
        match result {
            Ok(rows) => {
                for (method, row) in rows {
                    per_method
                        .iter_mut()
                        .find(|(m, _)| *m == method)
                        .expect("roster method")
                        .1
                        .push(row);
                }
            }
            Err(error) => diagnostics.push(RunDiagnostic { run, error }),
        }
    }

    let methods = per_method
        .into_iter()
        .map(|(method, runs)| {
            let r2: Vec<f64> = runs.iter().filter_map(|r| r.metrics.r2).collect();
            let mse: Vec<f64> = runs.iter().map(|r| r.metrics.mse).collect();
            let mae: Vec<f64> = runs.iter().map(|r| r.metrics.mae).collect();
            let (r2_mean, r2_std) = mean_std(&r2);
            let (mse_mean, mse_std) = mean_std(&mse);
            let (mae_mean, mae_std) = mean_std(&mae);
            MethodSummary {
                method: method.name().to_string(),
                incomplete: runs.len() < cfg.runs,
                runs,
                r2_mean: (!r2.is_empty()).then_some(r2_mean),
                r2_std: (!r2.is_empty()).then_some(r2_std),
                mse_mean,
                mse_std,
                mae_mean,
                mae_std,
            }
        })
        .collect();

    Ok(ExperimentReport {
        dataset: cfg.dataset.clone(),
        mode: if cfg.mode.is_imputation() {
            "imputation".into()
        } else {
            "noise".into()
        },
        requested_runs: cfg.runs,
        methods,
        diagnostics,
    })
}

impl ExperimentReport {
    /// `method, metric, mean, std` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["method", "metric", "mean", "std"])?;
        for m in &self.methods {
            let rows: [(&str, Option<f64>, Option<f64>); 3] = [
                ("r2", m.r2_mean, m.r2_std),
                ("mse", Some(m.mse_mean), Some(m.mse_std)),
                ("mae", Some(m.mae_mean), Some(m.mae_std)),
            ];
            for (name, mean, std) in rows {
                w.write_record([
                    m.method.clone(),
                    name.to_string(),
                    mean.map(|v| format!("{v}")).unwrap_or_default(),
                    std.map(|v| format!("{v}")).unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path.as_ref(), text)?;
        Ok(())
    }

    /// Plain-text table for the terminal.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:>18} {:>18} {:>18}\n",
            "method", "r2", "mse", "mae"
        ));
        for m in &self.methods {
            let r2 = match (m.r2_mean, m.r2_std) {
                (Some(mean), Some(std)) => format!("{:.3} ± {:.3}", mean, std),
                _ => "-".to_string(),
            };
            let flag = if m.incomplete { " (incomplete)" } else { "" };
            out.push_str(&format!(
                "{:<24} {:>18} {:>18} {:>18}{}\n",
                m.method,
                r2,
                format!("{:.4} ± {:.4}", m.mse_mean, m.mse_std),
                format!("{:.4} ± {:.4}", m.mae_mean, m.mae_std),
                flag
            ));
        }
        if !self.diagnostics.is_empty() {
            out.push_str("failed runs:\n");
            for d in &self.diagnostics {
                out.push_str(&format!("  run {}: {}\n", d.run, d.error));
            }
        }
        out
    }
}

/// Emits the simulated dataset (masked or noised), the untouched truth, the
/// split plan, and the simulation sidecar into `out_dir`.
pub fn simulate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let raw = load_csv(&cfg.dataset, &cfg.target_column)?;
    let seeds = cfg.run_seeds(0);
    let plan = split_dataset(&raw, cfg.split, seeds.split)?;
    match &cfg.mode {
        ExperimentMode::Imputation {
            masked_column,
            missing_rate,
            ..
        } => {
            let column = raw
                .column_index(masked_column)
                .ok_or_else(|| Error::Data(format!("masked column {masked_column:?} not found")))?;
            let masked = mask_column(&raw, &plan, column, *missing_rate, seeds.simulate)?;
            write_csv(&masked, out_dir.join("simulated.csv"))?;
            let cells: Vec<(usize, usize)> = (0..masked.n_rows())
                .filter(|&r| masked.missing[r][column] && !raw.missing[r][column])
                .map(|r| (r, column))
                .collect();
            std::fs::write(
                out_dir.join("mask.json"),
                serde_json::to_string_pretty(&cells)?,
            )?;
        }
        ExperimentMode::Noise {
            fraction,
            level_lo,
            level_hi,
        } => {
            let (noised, ids) =
                inject_noise(&raw, &plan, *fraction, *level_lo, *level_hi, seeds.simulate)?;
            write_csv(&noised, out_dir.join("simulated.csv"))?;
            std::fs::write(
                out_dir.join("noise_ids.json"),
                serde_json::to_string_pretty(&ids)?,
            )?;
        }
    }
    write_csv(&raw, out_dir.join("truth.csv"))?;
    std::fs::write(
        out_dir.join("split.json"),
        serde_json::to_string_pretty(&plan)?,
    )?;
    Ok(())
}

/// Runs one guided training pass and exports the analysis artifacts:
/// `history.csv`, `embeddings.csv`, `histogram.csv`, and `tightness.json`.
pub fn export_embeddings(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    if !cfg.mode.is_imputation() {
        return Err(Error::Config(
            "embedding export needs an imputation-mode config".into(),
        ));
    }
    std::fs::create_dir_all(out_dir)?;
    let raw = load_csv(&cfg.dataset, &cfg.target_column)?;
    let seeds = cfg.run_seeds(0);
    let prep = prepare_imputation_run(&raw, cfg, seeds)?;
    let ggh_cfg = GghConfig {
        seed: seeds.model,
        ..cfg.ggh.clone()
    };
    let outcome = ggh_train(&prep.masked_std, &prep.plan, &prep.spec, &ggh_cfg)?;
    outcome.history.write_csv(out_dir.join("history.csv"))?;

    let mut w = csv::Writer::from_path(out_dir.join("epochs.csv"))?;
    w.write_record(["epoch", "val_mse", "n_selected", "n_survivors"])?;
    for e in &outcome.epoch_stats {
        w.write_record([
            e.epoch.to_string(),
            format!("{}", e.val_mse),
            e.n_selected.to_string(),
            e.n_survivors.to_string(),
        ])?;
    }
    w.flush()?;

    let oracle = oracle_label(&outcome.batch, &prep.truth_std);
    let hist = selection_histogram(&outcome.history, &oracle, 20)?;
    hist.write_csv(out_dir.join("histogram.csv"))?;

    let set = outcome.final_enriched.as_ref().ok_or_else(|| {
        Error::Run("no post-warmup epoch ran; nothing to embed".into())
    })?;
    write_embeddings_csv(set, &outcome.batch, Some(&oracle), out_dir.join("embeddings.csv"))?;

    let stat = tightness(set, &oracle)?;
    let (freq_correct, freq_incorrect) = mean_selection_frequencies(&outcome.history, &oracle);
    let final_rate = |want: bool| {
        let (mut sel, mut n) = (0usize, 0usize);
        for r in &outcome.history.records {
            if !r.excluded && !r.ground_copy && oracle[r.hyp_id] == want {
                n += 1;
                if r.selected_this_epoch {
                    sel += 1;
                }
            }
        }
        if n == 0 { 0.0 } else { sel as f64 / n as f64 }
    };
    let (tx, ty) = prep.masked_std.complete_xy(&prep.plan.test)?;
    let preds: Vec<f64> = tx.iter().map(|r| outcome.model.predict(r)).collect();
    let test = compute_metrics(&preds, &ty)?;
    let summary = serde_json::json!({
        "correct_mean_dist": stat.correct_mean_dist,
        "incorrect_mean_dist": stat.incorrect_mean_dist,
        "mean_selection_frequency_correct": freq_correct,
        "mean_selection_frequency_incorrect": freq_incorrect,
        "final_epoch_selected_correct": final_rate(true),
        "final_epoch_selected_incorrect": final_rate(false),
        "best_epoch": outcome.best_epoch,
        "test_r2": test.r2,
    });
    std::fs::write(
        out_dir.join("tightness.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip_through_serde() {
        for m in [
            Method::CompleteColumns,
            Method::BestImputation,
            Method::Ggh,
            Method::GghNoiseFilter,
        ] {
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
            let back: Method = serde_json::from_str(&json).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn validation_rejects_mode_mismatched_methods() {
        let cfg = ExperimentConfig {
            dataset: "x.csv".into(),
            target_column: "y".into(),
            mode: ExperimentMode::Imputation {
                masked_column: "a".into(),
                missing_rate: 0.5,
                classes: ClassMode::QuantileBins(3),
            },
            methods: vec![Method::CleanData],
            split: default_split(),
            runs: 2,
            base_seed: 0,
            train: TrainConfig::default(),
            ggh: GghConfig::default(),
            noise_filter: NoiseFilterConfig::default(),
            imputers: ImputerParams::default(),
        };
        assert!(cfg.validate().is_err());

        let cfg = ExperimentConfig {
            methods: vec![Method::Ggh, Method::Ggh],
            ..cfg
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_rosters_match_the_table_shapes() {
        let imp = Method::default_roster(&ExperimentMode::Imputation {
            masked_column: "a".into(),
            missing_rate: 0.5,
            classes: ClassMode::QuantileBins(3),
        });
        assert_eq!(
            imp,
            vec![
                Method::CompleteColumns,
                Method::CompleteRows,
                Method::BestImputation,
                Method::Ggh,
                Method::CompleteData
            ]
        );
        let noise = Method::default_roster(&ExperimentMode::Noise {
            fraction: 0.3,
            level_lo: 0.4,
            level_hi: 0.6,
        });
        assert_eq!(
            noise,
            vec![
                Method::CompletePlusNoise,
                Method::GghNoiseFilter,
                Method::CleanData
            ]
        );
    }

    #[test]
    fn mean_std_basics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
        let (m, s) = mean_std(&[5.0]);
        assert_eq!(m, 5.0);
        assert_eq!(s, 0.0);
    }
}

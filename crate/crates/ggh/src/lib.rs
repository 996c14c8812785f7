//! Gradient-guided hypothesis training for tabular regression with scarce
//! or noisy data.
//!
//! When a variable is mostly missing, every incomplete row is expanded into
//! one candidate row per plausible class value. During training, each
//! candidate's per-sample gradient is enriched with the row's input features
//! and loss; a one-class boundary fitted on the complete rows' enriched
//! gradients then decides, epoch by epoch, which candidates behave like
//! ground truth and deserve backpropagation. The same enriched-gradient
//! geometry doubles as an unsupervised noise filter: rows whose vectors sit
//! in low-density regions are flagged by DBSCAN, and genuine outliers are
//! told apart from noise by how fast they rejoin the clean cluster during an
//! all-data retraining stage.
//!
//! The crate is organized around that pipeline:
//!
//! - [`model`]: dense ReLU regression network with per-sample gradients
//! - [`data`]: CSV loading, masking/noise simulators, standardization,
//!   hypothesis-class derivation
//! - [`hypotheses`]: candidate-row expansion and the exclusion list
//! - [`enrichment`]: signal decoupling, feature/loss concatenation,
//!   normalization
//! - [`oneclass`]: RBF one-class SVM fitted on ground-truth gradients
//! - [`selection`]: the guided training loop with warmup, amplification,
//!   and the selection-frequency high-pass
//! - [`dbscan`] and [`noise`]: density-based noise labelling and the
//!   outlier disambiguation stage
//! - [`baselines`]: column/row dropping and light imputers for comparison
//! - [`embedding`]: 2D projections, oracle labels, selection histograms
//! - [`experiment`]: multi-seed experiment harness behind the CLI
//!
//! The `examples/` directory has one runnable program per capability; start
//! with `hypothesis_training`. The `ggh` binary wraps [`experiment`] behind
//! `simulate`, `impute-train`, `noise-filter`, `baseline`,
//! `export-embeddings`, and `report` subcommands.

pub mod baselines;
pub mod data;
pub mod dbscan;
pub mod embedding;
pub mod enrichment;
pub mod error;
pub mod experiment;
pub mod hypotheses;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod noise;
pub mod oneclass;
pub mod selection;
pub mod synth;

pub use data::{load_csv, mask_column, split_dataset, standardize, DataMatrix, HypothesisSpec, SplitPlan};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport};
pub use metrics::{compute_metrics, Metrics};
pub use model::{MlpModel, TrainConfig};
pub use selection::{ggh_train, GghConfig, GghOutcome};

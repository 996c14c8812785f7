//! Unsupervised noise filtering on synthetic regression data.
//!
//! Perturbs 30% of the training targets by 40-60% of the target range,
//! flags suspect rows by clustering their enriched gradients, runs the
//! outlier-disambiguation stage, and compares a model trained on the
//! filtered rows against one trained on the noisy set and one trained on
//! the pristine set.
//!
//! Run with: cargo run --release --example noise_filtering

use ggh::data::{inject_noise, split_dataset, standardize};
use ggh::metrics::compute_metrics;
use ggh::model::{train_sgd, TrainConfig};
use ggh::noise::{noise_filtered_train, NoiseFilterConfig, RowLabel};
use ggh::synth;

fn main() -> ggh::Result<()> {
    let seed = 11;
    let clean = synth::noise_benchmark(600, seed);
    let plan = split_dataset(&clean, (0.7, 0.15, 0.15), seed)?;
    let (noisy, noisy_ids) = inject_noise(&clean, &plan, 0.3, 0.4, 0.6, seed + 1)?;

    let noisy_std = standardize(&noisy, &plan)?;
    let clean_std = standardize(&clean, &plan)?;

    let train_cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let nf_cfg = NoiseFilterConfig {
        train: train_cfg.clone(),
        ..NoiseFilterConfig::default()
    };
    let outcome = noise_filtered_train(&noisy_std, &plan, &nf_cfg)?;

    let confusion = outcome.verdict.confusion(&noisy_ids);
    println!("stage-1 flags vs ground truth:");
    println!(
        "  flagged {}  precision {:.3}  accuracy {:.3}",
        confusion.true_positive + confusion.false_positive,
        confusion.precision().unwrap_or(f64::NAN),
        confusion.accuracy()
    );
    let readmitted = outcome.verdict.rows_with(RowLabel::OutlierReadmitted).len();
    println!("  re-admitted as outliers: {readmitted}");
    println!("  dbscan params: epsilon {:.3}, min_pts {}", outcome.params.epsilon, outcome.params.min_pts);

    let score = |data: &ggh::DataMatrix, model: &ggh::MlpModel| -> ggh::Result<f64> {
        let (tx, ty) = data.complete_xy(&plan.test)?;
        let preds: Vec<f64> = tx.iter().map(|r| model.predict(r)).collect();
        Ok(compute_metrics(&preds, &ty)?.r2.unwrap())
    };

    println!("\ntest R2:");
    println!("  filtered training  {:+.3}", score(&noisy_std, &outcome.model)?);

    let (x, y) = noisy_std.complete_xy(&plan.train)?;
    let (vx, vy) = noisy_std.complete_xy(&plan.validation)?;
    let noisy_model = train_sgd(&x, &y, &vx, &vy, &train_cfg)?;
    println!("  noisy training     {:+.3}", score(&noisy_std, &noisy_model.model)?);

    let (x, y) = clean_std.complete_xy(&plan.train)?;
    let (vx, vy) = clean_std.complete_xy(&plan.validation)?;
    let clean_model = train_sgd(&x, &y, &vx, &vy, &train_cfg)?;
    println!("  clean training     {:+.3}", score(&clean_std, &clean_model.model)?);
    Ok(())
}

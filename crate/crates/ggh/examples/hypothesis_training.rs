//! End-to-end guided training on a synthetic dataset with a mostly-missing
//! determinant column.
//!
//! Masks 90% of the `level` column, expands each incomplete row into one
//! candidate per class value, trains with gradient-guided selection, and
//! compares against dropping the column, dropping incomplete rows, and the
//! untouched dataset. Because the data is synthetic we also know which
//! hypotheses were correct, so the selection quality is printed directly.
//!
//! Run with: cargo run --release --example hypothesis_training

use ggh::baselines::{complete_columns, complete_rows};
use ggh::data::{mask_column, split_dataset, standardize, HypothesisSpec};
use ggh::embedding::{mean_selection_frequencies, oracle_label, tightness};
use ggh::metrics::compute_metrics;
use ggh::model::{train_sgd, TrainConfig};
use ggh::selection::{ggh_train, GghConfig};
use ggh::synth;

fn main() -> ggh::Result<()> {
    let seed = 7;
    let raw = synth::hypothesis_benchmark(600, seed);
    let plan = split_dataset(&raw, (0.7, 0.15, 0.15), seed)?;
    let level_col = raw.column_index("level").unwrap();
    let masked = mask_column(&raw, &plan, level_col, 0.9, seed + 1)?;
    let data = standardize(&masked, &plan)?;

    // Class values a practitioner would declare, mapped into the
    // standardized space of the masked dataset.
    let spec = HypothesisSpec {
        column: level_col,
        class_values: synth::BENCHMARK_LEVELS.to_vec(),
    }
    .standardized_for(&data);

    let cfg = GghConfig {
        seed,
        ..GghConfig::default()
    };
    let outcome = ggh_train(&data, &plan, &spec, &cfg)?;

    // Selection quality against the known truth.
    let mut truth = raw.clone();
    let stats = data.standardization.as_ref().unwrap();
    for row in &mut truth.values {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (*v - stats[c].mean) / stats[c].std;
        }
    }
    let oracle = oracle_label(&outcome.batch, &truth);
    let (freq_correct, freq_incorrect) = mean_selection_frequencies(&outcome.history, &oracle);
    println!("mean selection frequency  correct:   {freq_correct:.3}");
    println!("mean selection frequency  incorrect: {freq_incorrect:.3}");
    if let Some(set) = &outcome.final_enriched {
        let t = tightness(set, &oracle)?;
        println!(
            "distance to ground centroid  correct: {:.3}  incorrect: {:.3}",
            t.correct_mean_dist, t.incorrect_mean_dist
        );
    }
    println!("best epoch: {} of {} run", outcome.best_epoch, outcome.epoch_stats.len());

    // Test-set comparison.
    let train_cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let score = |model: &ggh::MlpModel, data: &ggh::DataMatrix| -> ggh::Result<f64> {
        let (tx, ty) = data.complete_xy(&plan.test)?;
        let preds: Vec<f64> = tx.iter().map(|r| model.predict(r)).collect();
        Ok(compute_metrics(&preds, &ty)?.r2.unwrap())
    };

    println!("\ntest R2:");
    println!("  guided training   {:+.3}", score(&outcome.model, &data)?);

    let dropped = complete_columns(&data)?;
    let (x, y) = dropped.complete_xy(&plan.train)?;
    let (vx, vy) = dropped.complete_xy(&plan.validation)?;
    let out = train_sgd(&x, &y, &vx, &vy, &train_cfg)?;
    println!("  complete columns  {:+.3}", score(&out.model, &dropped)?);

    let filtered = complete_rows(&data, &plan)?;
    let (x, y) = data.complete_xy(&filtered.train)?;
    let out = train_sgd(&x, &y, &vx, &vy, &train_cfg)?;
    println!("  complete rows     {:+.3}", score(&out.model, &data)?);

    let full = standardize(&raw, &plan)?;
    let (x, y) = full.complete_xy(&plan.train)?;
    let (vx, vy) = full.complete_xy(&plan.validation)?;
    let out = train_sgd(&x, &y, &vx, &vy, &train_cfg)?;
    println!("  complete data     {:+.3}", score(&out.model, &full)?);
    Ok(())
}

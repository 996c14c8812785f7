//! Regression metrics and the early-stopping rule used for reporting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard regression metrics. `r2` is `None` when the evaluation targets
/// have zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub r2: Option<f64>,
    pub mse: f64,
    pub mae: f64,
}

/// `r2 = 1 - SSE/SST` with `SST` over the evaluation targets; `mse`/`mae`
/// are the usual means.
pub fn compute_metrics(predictions: &[f64], targets: &[f64]) -> Result<Metrics> {
    if predictions.len() != targets.len() || predictions.is_empty() {
        return Err(Error::Shape(format!(
            "metrics need equal non-empty lengths, got {} and {}",
            predictions.len(),
            targets.len()
        )));
    }
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let sst: f64 = targets.iter().map(|t| (t - mean) * (t - mean)).sum();
    let sse: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    let mae: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / n;
    Ok(Metrics {
        r2: if sst > 0.0 { Some(1.0 - sse / sst) } else { None },
        mse: sse / n,
        mae,
    })
}

/// Index of the epoch an early-stopped run would report as best: the first
/// strict minimum, scanning until `patience` epochs pass without
/// improvement.
pub fn early_stop(validation_losses: &[f64], patience: usize) -> usize {
    let mut best = f64::INFINITY;
    let mut best_idx = 0;
    let mut since = 0;
    for (i, &l) in validation_losses.iter().enumerate() {
        if l < best {
            best = l;
            best_idx = i;
            since = 0;
        } else {
            since += 1;
            if since >= patience {
                break;
            }
        }
    }
    best_idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let m = compute_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.r2, Some(1.0));
        assert_eq!(m.mse, 0.0);
        assert_eq!(m.mae, 0.0);
    }

    #[test]
    fn constant_mean_prediction_scores_zero_r2() {
        let y = [1.0, 2.0, 3.0];
        let m = compute_metrics(&[2.0, 2.0, 2.0], &y).unwrap();
        assert!((m.r2.unwrap() - 0.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_example() {
        let m = compute_metrics(&[1.0, 2.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((m.mse - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.mae - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.r2.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_targets_have_no_r2() {
        let m = compute_metrics(&[1.0, 2.0], &[5.0, 5.0]).unwrap();
        assert_eq!(m.r2, None);
        assert!(m.mse > 0.0);
    }

    #[test]
    fn early_stop_rules() {
        // Monotone decreasing: last epoch is best.
        assert_eq!(early_stop(&[5.0, 4.0, 3.0, 2.0], 2), 3);
        // Declared example: stops after epoch 3, best is index 1.
        assert_eq!(early_stop(&[3.0, 2.0, 2.5, 2.6, 1.0], 2), 1);
        // Ties break toward the earlier epoch.
        assert_eq!(early_stop(&[2.0, 2.0, 2.0], 5), 0);
    }
}

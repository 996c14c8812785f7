//! Signal-existence probe: score hypotheses under a well-converged model.

use ggh::data::{load_csv, mask_column, split_dataset, standardize, HypothesisSpec};
use ggh::enrichment::{build_enriched, normalize_with_ground_stats, EnrichmentInput, SampleKey};
use ggh::hypotheses::expand_hypotheses;
use ggh::model::{train_sgd, TrainConfig};
use ggh::oneclass::{fit_one_class, score_membership, Bandwidth};

fn main() -> ggh::Result<()> {
    let raw = load_csv("data/airfoil_self_noise.csv", "scaled-sound-pressure")?;
    let plan = split_dataset(&raw, (0.7, 0.15, 0.15), 7)?;
    let col = raw.column_index("chord-length").unwrap();
    let masked = mask_column(&raw, &plan, col, 0.96, 8)?;
    let data = standardize(&masked, &plan)?;
    let spec = HypothesisSpec {
        column: col,
        class_values: vec![0.0254, 0.0508, 0.1016, 0.1524, 0.2286, 0.3048],
    }
    .standardized_for(&data);

    // Oracle model: trained on the full unmasked data (same standardization).
    let mut full = raw.clone();
    let stats = data.standardization.as_ref().unwrap().clone();
    for row in &mut full.values {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (*v - stats[c].mean) / stats[c].std;
        }
    }
    full.standardization = Some(stats);
    let (x, y) = full.complete_xy(&plan.train)?;
    let (vx, vy) = full.complete_xy(&plan.validation)?;
    for epochs in [100usize, 400, 2000, 8000] {
        let cfg = TrainConfig { hidden_dims: vec![32], epochs, batch_size: 64, learning_rate: 0.1, patience: epochs, seed: 7 };
        let oracle_model = train_sgd(&x, &y, &vx, &vy, &cfg)?.model;
        let val = oracle_model.mse(&vx, &vy);

        let batch = expand_hypotheses(&data, &plan, &spec, true)?;
        // Materialize ground + hypothesis rows under the masked data.
        let mut gx = Vec::new();
        let mut gy = Vec::new();
        let mut gids = Vec::new();
        for &r in &batch.ground_rows {
            gx.push(data.features_of(r, None)?);
            gy.push(data.target_of(r));
            gids.push(r);
        }
        let mut hx = Vec::new();
        let mut hy = Vec::new();
        let mut hids = Vec::new();
        let mut hclass = Vec::new();
        let mut hsrc = Vec::new();
        for h in batch.selectable() {
            hx.push(data.features_of(h.source_row, Some((col, h.value)))?);
            hy.push(data.target_of(h.source_row));
            hids.push(h.id);
            hclass.push(h.class_id);
            hsrc.push(h.source_row);
        }
        let g = oracle_model.forward_batch(&gx, &gy, &gids)?;
        let h = oracle_model.forward_batch(&hx, &hy, &hids)?;

        let mut items: Vec<EnrichmentInput> = Vec::new();
        for (i, &row) in gids.iter().enumerate() {
            items.push(EnrichmentInput { key: SampleKey::Ground(row), class_id: None, gradient: &g.penultimate[i], input: &gx[i], loss: g.losses[i] });
        }
        for (i, &id) in hids.iter().enumerate() {
            items.push(EnrichmentInput { key: SampleKey::Hypothesis(id), class_id: Some(hclass[i]), gradient: &h.penultimate[i], input: &hx[i], loss: h.losses[i] });
        }
        let set = build_enriched(&items, 100, 30)?; // loss included
        let set = normalize_with_ground_stats(&set)?;
        let ground_vecs: Vec<Vec<f64>> = set.ground_vectors().map(|v| v.dims.clone()).collect();
        let hyp_vecs: Vec<Vec<f64>> = set.hypothesis_vectors().map(|v| v.dims.clone()).collect();
        let svm = fit_one_class(&ground_vecs, 0.1, Bandwidth::MedianHeuristic)?;
        let members = score_membership(&svm, &hyp_vecs)?;

        // Oracle correctness per hypothesis.
        let mut n_c = 0; let mut sel_c = 0; let mut n_i = 0; let mut sel_i = 0;
        for (i, &id) in hids.iter().enumerate() {
            let truth = full.values[hsrc[i]][col];
            let correct = spec.nearest_class(truth) == batch.hypothesis_rows[id].class_id;
            if correct { n_c += 1; if members[i] { sel_c += 1; } }
            else { n_i += 1; if members[i] { sel_i += 1; } }
        }
        println!(
            "epochs {epochs:5}: val_mse {val:.3}  member rate correct {:.3} ({sel_c}/{n_c})  incorrect {:.3} ({sel_i}/{n_i})",
            sel_c as f64 / n_c as f64,
            sel_i as f64 / n_i as f64
        );
    }
    Ok(())
}

//! Dense feed-forward regression network with per-sample gradients.
//!
//! The network is deliberately small: ReLU hidden layers, identity output,
//! squared-error loss, trained by full-batch gradient descent. What makes it
//! unusual is that [`MlpModel::forward_batch`] returns the *per-sample*
//! gradient of every parameter, plus a flattened copy of the gradient of the
//! layer feeding the last hidden activation. Those per-sample vectors are the
//! raw material the selection machinery works on; the full-parameter
//! gradients are what actually gets backpropagated once a sample survives
//! selection.
//!
//! All arithmetic is `f64`. Everything is deterministic for a fixed seed:
//! initialization uses a counter-based RNG and batch reductions always run
//! in row order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Fully-connected ReLU regression network.
///
/// `layer_dims` is `[input, hidden..., 1]`; at least one hidden layer is
/// required so the "layer feeding the last hidden activation" is always
/// defined. Weights for transform `k` are row-major with shape
/// `(layer_dims[k+1], layer_dims[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_dims: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Per-sample forward/backward results for one batch.
///
/// `penultimate[i]` is the flattened gradient (weights then bias) of the
/// transform producing the last hidden activation, for sample `i`. `full[i]`
/// holds the gradients of every parameter for the same sample.
#[derive(Debug, Clone)]
pub struct BatchGradients {
    pub row_ids: Vec<usize>,
    pub predictions: Vec<f64>,
    pub losses: Vec<f64>,
    pub penultimate: Vec<Vec<f64>>,
    pub full: Vec<GradientBuffer>,
}

/// Scoring-pass results: like [`BatchGradients`] without the full-parameter
/// buffers, for when only the enriched-vector ingredients are needed.
#[derive(Debug, Clone)]
pub struct ScoredBatch {
    pub row_ids: Vec<usize>,
    pub predictions: Vec<f64>,
    pub losses: Vec<f64>,
    pub penultimate: Vec<Vec<f64>>,
}

/// Gradient (or any parameter-shaped value) for a whole model.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl GradientBuffer {
    pub fn zeros_like(model: &MlpModel) -> Self {
        GradientBuffer {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &GradientBuffer, scale: f64) {
        for (dst, src) in self.weights.iter_mut().zip(&other.weights) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
        for (dst, src) in self.biases.iter_mut().zip(&other.biases) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    pub fn matches(&self, model: &MlpModel) -> bool {
        self.weights.len() == model.weights.len()
            && self.biases.len() == model.biases.len()
            && self
                .weights
                .iter()
                .zip(&model.weights)
                .all(|(a, b)| a.len() == b.len())
            && self
                .biases
                .iter()
                .zip(&model.biases)
                .all(|(a, b)| a.len() == b.len())
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

impl MlpModel {
    /// Creates a model with weights drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`
    /// and zero biases. Deterministic for a fixed seed.
    pub fn init(layer_dims: &[usize], seed: u64) -> Result<Self> {
        if layer_dims.len() < 3 {
            return Err(Error::Config(format!(
                "need [input, hidden..., output] with at least one hidden layer, got {:?}",
                layer_dims
            )));
        }
        if layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::Config(format!(
                "zero-sized layer in {:?}",
                layer_dims
            )));
        }
        if *layer_dims.last().unwrap() != 1 {
            return Err(Error::Config(format!(
                "output dimension must be 1, got {}",
                layer_dims.last().unwrap()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for k in 0..layer_dims.len() - 1 {
            let fan_in = layer_dims[k];
            let fan_out = layer_dims[k + 1];
            let limit = 1.0 / (fan_in as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpModel {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    /// Number of affine transforms.
    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    /// Index of the transform producing the last hidden activation.
    pub fn penultimate_layer(&self) -> usize {
        self.num_layers() - 2
    }

    /// Dimension of the flattened penultimate-layer gradient.
    pub fn penultimate_grad_dim(&self) -> usize {
        let p = self.penultimate_layer();
        self.layer_dims[p] * self.layer_dims[p + 1] + self.layer_dims[p + 1]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    #[cfg(test)]
    pub(crate) fn weights_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.weights
    }

    /// Forward pass for a single row.
    pub fn predict(&self, input: &[f64]) -> f64 {
        let mut act = input.to_vec();
        for k in 0..self.num_layers() {
            act = self.affine(k, &act, k < self.num_layers() - 1);
        }
        act[0]
    }

    fn affine(&self, layer: usize, input: &[f64], relu: bool) -> Vec<f64> {
        let in_dim = self.layer_dims[layer];
        let out_dim = self.layer_dims[layer + 1];
        let w = &self.weights[layer];
        let b = &self.biases[layer];
        let mut out = vec![0.0; out_dim];
        for o in 0..out_dim {
            let mut sum = b[o];
            let row = o * in_dim;
            for (i, &x) in input.iter().enumerate() {
                sum += w[row + i] * x;
            }
            out[o] = if relu { sum.max(0.0) } else { sum };
        }
        out
    }

    /// Mean squared error over a batch, computed in row order.
    pub fn mse(&self, inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (x, &t) in inputs.iter().zip(targets) {
            let p = self.predict(x);
            sum += (p - t) * (p - t);
        }
        sum / inputs.len() as f64
    }

    /// Forward pass plus per-sample backward pass for a whole batch.
    ///
    /// The model is unchanged; calling twice on the same inputs yields
    /// identical results. Per-sample loss is the squared error
    /// `(prediction - target)^2`.
    pub fn forward_batch(
        &self,
        inputs: &[Vec<f64>],
        targets: &[f64],
        row_ids: &[usize],
    ) -> Result<BatchGradients> {
        if inputs.len() != targets.len() || inputs.len() != row_ids.len() {
            return Err(Error::Shape(format!(
                "batch sizes disagree: {} inputs, {} targets, {} ids",
                inputs.len(),
                targets.len(),
                row_ids.len()
            )));
        }
        let n = inputs.len();
        let mut out = BatchGradients {
            row_ids: row_ids.to_vec(),
            predictions: Vec::with_capacity(n),
            losses: Vec::with_capacity(n),
            penultimate: Vec::with_capacity(n),
            full: Vec::with_capacity(n),
        };
        for (x, &t) in inputs.iter().zip(targets) {
            if x.len() != self.input_dim() {
                return Err(Error::Shape(format!(
                    "input width {} does not match model input dim {}",
                    x.len(),
                    self.input_dim()
                )));
            }
            let (pred, loss, grad) = self.backward_single(x, t);
            let p = self.penultimate_layer();
            let mut flat = grad.weights[p].clone();
            flat.extend_from_slice(&grad.biases[p]);
            out.predictions.push(pred);
            out.losses.push(loss);
            out.penultimate.push(flat);
            out.full.push(grad);
        }
        Ok(out)
    }

    /// Forward plus per-sample backward, keeping only the flattened
    /// penultimate-layer gradient. The cheap variant for selection scoring.
    pub fn forward_scores(
        &self,
        inputs: &[Vec<f64>],
        targets: &[f64],
        row_ids: &[usize],
    ) -> Result<ScoredBatch> {
        let batch = self.forward_batch(inputs, targets, row_ids)?;
        Ok(ScoredBatch {
            row_ids: batch.row_ids,
            predictions: batch.predictions,
            losses: batch.losses,
            penultimate: batch.penultimate,
        })
    }

    /// One pass of mini-batch SGD over the given samples: a seeded shuffle,
    /// then one weighted-mean gradient step per chunk. Ground rows enter
    /// with their amplification as weight, so a batch update is
    /// `sum(w_i * g_i) / batch_len`.
    pub fn sgd_epoch(
        &mut self,
        inputs: &[Vec<f64>],
        targets: &[f64],
        weights: &[f64],
        batch_size: usize,
        learning_rate: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        if inputs.len() != targets.len() || inputs.len() != weights.len() {
            return Err(Error::Shape(format!(
                "batch sizes disagree: {} inputs, {} targets, {} weights",
                inputs.len(),
                targets.len(),
                weights.len()
            )));
        }
        if batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        let mut order: Vec<usize> = (0..inputs.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(rng);
        for chunk in order.chunks(batch_size) {
            let mut sum = GradientBuffer::zeros_like(self);
            for &i in chunk {
                let (_, _, grad) = self.backward_single(&inputs[i], targets[i]);
                sum.add_scaled(&grad, weights[i]);
            }
            let n = chunk.len() as f64;
            for v in sum.weights.iter_mut().chain(sum.biases.iter_mut()) {
                for x in v.iter_mut() {
                    *x /= n;
                }
            }
            self.sgd_step(&sum, learning_rate)?;
        }
        Ok(())
    }

    fn backward_single(&self, input: &[f64], target: f64) -> (f64, f64, GradientBuffer) {
        let layers = self.num_layers();
        // Forward, caching post-activation values per layer.
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers + 1);
        acts.push(input.to_vec());
        for k in 0..layers {
            let a = self.affine(k, &acts[k], k < layers - 1);
            acts.push(a);
        }
        let pred = acts[layers][0];
        let diff = pred - target;
        let loss = diff * diff;

        let mut grad = GradientBuffer::zeros_like(self);
        // Output layer has identity activation, so dL/dz = 2 * diff.
        let mut delta = vec![2.0 * diff];
        for k in (0..layers).rev() {
            let in_dim = self.layer_dims[k];
            let out_dim = self.layer_dims[k + 1];
            let a_in = &acts[k];
            for o in 0..out_dim {
                let d = delta[o];
                grad.biases[k][o] = d;
                let row = o * in_dim;
                for i in 0..in_dim {
                    grad.weights[k][row + i] = d * a_in[i];
                }
            }
            if k > 0 {
                // Propagate through the ReLU of the previous activation.
                let mut prev = vec![0.0; in_dim];
                for o in 0..out_dim {
                    let d = delta[o];
                    let row = o * in_dim;
                    for (i, p) in prev.iter_mut().enumerate() {
                        *p += self.weights[k][row + i] * d;
                    }
                }
                for (p, &a) in prev.iter_mut().zip(a_in.iter()) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        (pred, loss, grad)
    }

    /// Applies one gradient-descent step: `param -= learning_rate * grad`.
    pub fn sgd_step(&mut self, grad: &GradientBuffer, learning_rate: f64) -> Result<()> {
        if !grad.matches(self) {
            return Err(Error::Shape(
                "gradient shapes do not match model parameters".into(),
            ));
        }
        if !grad.is_finite() {
            return Err(Error::Numeric("non-finite gradient entry".into()));
        }
        for (w, g) in self.weights.iter_mut().zip(&grad.weights) {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= learning_rate * gi;
            }
        }
        for (b, g) in self.biases.iter_mut().zip(&grad.biases) {
            for (bi, gi) in b.iter_mut().zip(g) {
                *bi -= learning_rate * gi;
            }
        }
        Ok(())
    }
}

/// Combines per-sample gradients into one update direction.
///
/// Hypothesis gradients enter with weight 1, ground gradients with weight
/// `amplification`, and the sum is divided by the plain sample count, so the
/// ground contribution is exactly `amplification` times what it would be
/// unamplified. Returns `None` for an empty batch.
pub fn aggregate_gradients(
    model: &MlpModel,
    hypothesis: &[&GradientBuffer],
    ground: &[&GradientBuffer],
    amplification: f64,
) -> Option<GradientBuffer> {
    let total = hypothesis.len() + ground.len();
    if total == 0 {
        return None;
    }
    let mut hyp_sum = GradientBuffer::zeros_like(model);
    for g in hypothesis {
        hyp_sum.add_scaled(g, 1.0);
    }
    let mut ground_sum = GradientBuffer::zeros_like(model);
    for g in ground {
        ground_sum.add_scaled(g, 1.0);
    }
    let n = total as f64;
    let combine = |h: &[f64], g: &[f64]| -> Vec<f64> {
        h.iter()
            .zip(g)
            .map(|(hv, gv)| (hv + amplification * gv) / n)
            .collect()
    };
    Some(GradientBuffer {
        weights: hyp_sum
            .weights
            .iter()
            .zip(&ground_sum.weights)
            .map(|(h, g)| combine(h, g))
            .collect(),
        biases: hyp_sum
            .biases
            .iter()
            .zip(&ground_sum.biases)
            .map(|(h, g)| combine(h, g))
            .collect(),
    })
}

/// The per-epoch shuffle stream. Both the plain trainer and the guided loop
/// derive batches through this, which is what makes the two bit-identical
/// when the guided loop degenerates to plain SGD.
pub fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (epoch as u64).wrapping_mul(0x9E3779B97F4A7C15))
}

/// Training-loop knobs shared by the plain trainer and the baselines.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_dims: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_dims: vec![32],
            epochs: 400,
            batch_size: 64,
            learning_rate: 0.1,
            patience: 20,
            seed: 0,
        }
    }
}

/// Validation-loss tracker with strict-improvement patience.
///
/// Ties do not count as improvement, so the earliest best epoch wins.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    best: f64,
    best_epoch: usize,
    since_best: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        EarlyStopper {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            since_best: 0,
        }
    }

    /// Records a validation loss; returns true if it is a new best.
    pub fn observe(&mut self, epoch: usize, loss: f64) -> bool {
        if loss < self.best {
            self.best = loss;
            self.best_epoch = epoch;
            self.since_best = 0;
            true
        } else {
            self.since_best += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.since_best >= self.patience
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best
    }
}

/// Outcome of a plain training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub val_losses: Vec<f64>,
    pub best_epoch: usize,
}

/// Mini-batch SGD training with early stopping on validation MSE. Returns
/// the best-checkpoint model.
pub fn train_sgd(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    val_x: &[Vec<f64>],
    val_y: &[f64],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if train_x.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    let mut dims = vec![train_x[0].len()];
    dims.extend_from_slice(&cfg.hidden_dims);
    dims.push(1);
    let mut model = MlpModel::init(&dims, cfg.seed)?;
    let weights = vec![1.0; train_x.len()];
    let mut stopper = EarlyStopper::new(cfg.patience);
    let mut best = model.clone();
    let mut val_losses = Vec::new();
    for epoch in 0..cfg.epochs {
        let mut rng = epoch_rng(cfg.seed, epoch);
        model.sgd_epoch(
            train_x,
            train_y,
            &weights,
            cfg.batch_size,
            cfg.learning_rate,
            &mut rng,
        )?;
        let val = model.mse(val_x, val_y);
        val_losses.push(val);
        if stopper.observe(epoch, val) {
            best = model.clone();
        }
        if stopper.should_stop() {
            break;
        }
    }
    Ok(TrainOutcome {
        model: best,
        val_losses,
        best_epoch: stopper.best_epoch(),
    })
}

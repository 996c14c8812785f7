//! Enriched gradient vectors: per-sample penultimate-layer gradients
//! concatenated with the sample's input features and, once the stagger
//! epoch is reached, its loss. Optional per-source-row signal decoupling and
//! per-group normalization happen here too.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Identity of an enriched vector: either a complete training row or a
/// hypothesis row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SampleKey {
    Ground(usize),
    Hypothesis(usize),
}

/// Shape of every vector in an [`EnrichedGradientSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub grad_dim: usize,
    pub input_dim: usize,
    pub loss_included: bool,
}

impl Layout {
    pub fn total_dim(&self) -> usize {
        self.grad_dim + self.input_dim + usize::from(self.loss_included)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnrichedVector {
    pub key: SampleKey,
    /// Hypothesis class, `None` for ground rows.
    pub class_id: Option<usize>,
    pub dims: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnrichedGradientSet {
    pub vectors: Vec<EnrichedVector>,
    pub epoch: usize,
    pub layout: Layout,
}

impl EnrichedGradientSet {
    pub fn ground_vectors(&self) -> impl Iterator<Item = &EnrichedVector> {
        self.vectors.iter().filter(|v| v.class_id.is_none())
    }

    pub fn hypothesis_vectors(&self) -> impl Iterator<Item = &EnrichedVector> {
        self.vectors.iter().filter(|v| v.class_id.is_some())
    }
}

/// One sample's raw material for enrichment.
#[derive(Debug, Clone)]
pub struct EnrichmentInput<'a> {
    pub key: SampleKey,
    pub class_id: Option<usize>,
    pub gradient: &'a [f64],
    pub input: &'a [f64],
    pub loss: f64,
}

/// Subtracts the group mean from each vector sharing a group key.
///
/// Used on hypothesis gradients grouped by source row: the shared
/// non-hypothesized input signal dominates the group mean, so removing it
/// isolates the hypothesis-dependent signal. Singleton groups pass through
/// unchanged.
pub fn decouple_signal(vectors: &mut [Vec<f64>], group_keys: &[usize]) {
    assert_eq!(vectors.len(), group_keys.len());
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &k) in group_keys.iter().enumerate() {
        groups.entry(k).or_default().push(i);
    }
    for members in groups.values() {
        if members.len() < 2 {
            continue;
        }
        let dim = vectors[members[0]].len();
        let mut mean = vec![0.0f64; dim];
        for &i in members {
            for (m, v) in mean.iter_mut().zip(&vectors[i]) {
                *m += v;
            }
        }
        let n = members.len() as f64;
        for m in &mut mean {
            *m /= n;
        }
        for &i in members {
            for (v, m) in vectors[i].iter_mut().zip(&mean) {
                *v -= m;
            }
        }
    }
}

/// Concatenates `gradient ++ input` per sample, appending the loss as a
/// final scalar once `epoch >= loss_feature_epoch`.
pub fn build_enriched(
    items: &[EnrichmentInput<'_>],
    epoch: usize,
    loss_feature_epoch: usize,
) -> Result<EnrichedGradientSet> {
    if items.is_empty() {
        return Err(Error::Data("nothing to enrich".into()));
    }
    let grad_dim = items[0].gradient.len();
    let input_dim = items[0].input.len();
    let loss_included = epoch >= loss_feature_epoch;
    let mut vectors = Vec::with_capacity(items.len());
    for item in items {
        if item.gradient.len() != grad_dim || item.input.len() != input_dim {
            return Err(Error::Shape(format!(
                "misaligned enrichment inputs: expected grad {grad_dim} / input {input_dim}, \
                 got grad {} / input {}",
                item.gradient.len(),
                item.input.len()
            )));
        }
        let mut dims = Vec::with_capacity(grad_dim + input_dim + 1);
        dims.extend_from_slice(item.gradient);
        dims.extend_from_slice(item.input);
        if loss_included {
            dims.push(item.loss);
        }
        vectors.push(EnrichedVector {
            key: item.key,
            class_id: item.class_id,
            dims,
        });
    }
    Ok(EnrichedGradientSet {
        vectors,
        epoch,
        layout: Layout {
            grad_dim,
            input_dim,
            loss_included,
        },
    })
}

/// Which statistics drive normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormScope {
    /// All vectors are z-scored with the ground group's statistics, so the
    /// one-class fit and the scored hypotheses share one space.
    Ground,
    /// Each class batch (and the ground group) is z-scored with its own
    /// statistics.
    PerClass,
}

fn zscore_group(vectors: &mut Vec<EnrichedVector>, members: &[usize], dim: usize) {
    for d in 0..dim {
        let mut mean = 0.0;
        for &i in members {
            mean += vectors[i].dims[d];
        }
        mean /= members.len() as f64;
        let mut var = 0.0;
        for &i in members {
            let x = vectors[i].dims[d] - mean;
            var += x * x;
        }
        var /= members.len() as f64;
        let std = var.sqrt();
        for &i in members {
            vectors[i].dims[d] = if std < 1e-12 {
                0.0
            } else {
                (vectors[i].dims[d] - mean) / std
            };
        }
    }
}

/// Z-scores each class batch over itself; ground rows form their own group.
/// Zero-variance dimensions (and singleton groups) map to zeros.
pub fn normalize_per_class(set: &EnrichedGradientSet) -> EnrichedGradientSet {
    let mut out = set.clone();
    let dim = set.layout.total_dim();
    let mut groups: BTreeMap<Option<usize>, Vec<usize>> = BTreeMap::new();
    for (i, v) in out.vectors.iter().enumerate() {
        groups.entry(v.class_id).or_default().push(i);
    }
    for members in groups.values() {
        zscore_group(&mut out.vectors, members, dim);
    }
    out
}

/// Z-scores every vector with the mean/std of the ground group, keeping one
/// consistent space for the one-class fit and for scoring. Dimensions with
/// no ground variance map to zeros everywhere.
pub fn normalize_with_ground_stats(set: &EnrichedGradientSet) -> Result<EnrichedGradientSet> {
    let dim = set.layout.total_dim();
    let ground: Vec<usize> = set
        .vectors
        .iter()
        .enumerate()
        .filter(|(_, v)| v.class_id.is_none())
        .map(|(i, _)| i)
        .collect();
    if ground.is_empty() {
        return Err(Error::Data(
            "ground-statistics normalization needs at least one ground vector".into(),
        ));
    }
    let mut out = set.clone();
    for d in 0..dim {
        let mut mean = 0.0;
        for &i in &ground {
            mean += out.vectors[i].dims[d];
        }
        mean /= ground.len() as f64;
        let mut var = 0.0;
        for &i in &ground {
            let x = out.vectors[i].dims[d] - mean;
            var += x * x;
        }
        var /= ground.len() as f64;
        let std = var.sqrt();
        for v in &mut out.vectors {
            v.dims[d] = if std < 1e-12 {
                0.0
            } else {
                (v.dims[d] - mean) / std
            };
        }
    }
    Ok(out)
}

//! Density-based clustering used by the noise filter.
//!
//! Points with at least `min_pts` neighbors (self included) within `epsilon`
//! are core points; points within `epsilon` of a core point but below the
//! threshold are border points; everything else is noise. Clusters are
//! discovered in scan order and never reassigned, so a border point reachable
//! from several clusters belongs to the lowest-numbered one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{euclidean, percentile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    pub epsilon: f64,
    pub min_pts: usize,
}

impl DbscanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.min_pts == 0 {
            return Err(Error::Config("min_pts must be at least 1".into()));
        }
        Ok(())
    }

    /// k-distance heuristic: epsilon at the 90th percentile of each point's
    /// distance to its `min_pts`-th nearest other point. `min_pts` should be
    /// small relative to the point count; the noise filter derives it from
    /// the dataset's column count, not from the enriched-vector dimension.
    pub fn from_k_distance(points: &[Vec<f64>], min_pts: usize) -> Result<DbscanParams> {
        Self::from_k_distance_at(points, min_pts, 90.0)
    }

    /// [`DbscanParams::from_k_distance`] with an explicit percentile, for
    /// data where more than ~10% of rows are expected to be flaggable.
    pub fn from_k_distance_at(
        points: &[Vec<f64>],
        min_pts: usize,
        pct: f64,
    ) -> Result<DbscanParams> {
        if points.is_empty() {
            return Err(Error::Data("k-distance heuristic on empty set".into()));
        }
        let min_pts = min_pts.clamp(1, points.len().saturating_sub(1).max(1));
        let kd = k_distances(points, min_pts);
        let epsilon = percentile(&kd, pct);
        if !(epsilon > 0.0) {
            return Err(Error::Data(
                "k-distance heuristic degenerated to zero epsilon".into(),
            ));
        }
        Ok(DbscanParams { epsilon, min_pts })
    }
}

/// Distance from each point to its k-th nearest other point.
pub fn k_distances(points: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = points.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut d: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| euclidean(&points[i], &points[j]))
            .collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let idx = k.min(d.len()).saturating_sub(1);
        out.push(if d.is_empty() { 0.0 } else { d[idx] });
    }
    out
}

/// Cluster assignment of one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbLabel {
    Core(usize),
    Border(usize),
    Noise,
}

impl DbLabel {
    pub fn cluster(&self) -> Option<usize> {
        match self {
            DbLabel::Core(c) | DbLabel::Border(c) => Some(*c),
            DbLabel::Noise => None,
        }
    }

    pub fn is_noise(&self) -> bool {
        matches!(self, DbLabel::Noise)
    }
}

/// Runs DBSCAN over `points`. Deterministic for a fixed point order.
pub fn dbscan(points: &[Vec<f64>], params: &DbscanParams) -> Result<Vec<DbLabel>> {
    params.validate()?;
    if points.is_empty() {
        return Err(Error::Data("dbscan on empty set".into()));
    }
    if points
        .iter()
        .any(|p| p.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::Numeric("non-finite point".into()));
    }
    let n = points.len();
    // Neighborhoods include the point itself; radius is inclusive.
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| euclidean(&points[i], &points[j]) <= params.epsilon)
                .collect()
        })
        .collect();

    let mut labels = vec![DbLabel::Noise; n];
    let mut visited = vec![false; n];
    let mut cluster = 0usize;
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        if neighbors[seed].len() < params.min_pts {
            continue; // stays noise unless a later cluster claims it as border
        }
        labels[seed] = DbLabel::Core(cluster);
        let mut queue: Vec<usize> = neighbors[seed].clone();
        let mut head = 0;
        while head < queue.len() {
            let j = queue[head];
            head += 1;
            if labels[j].is_noise() {
                labels[j] = DbLabel::Border(cluster);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            if neighbors[j].len() >= params.min_pts {
                labels[j] = DbLabel::Core(cluster);
                queue.extend(neighbors[j].iter().copied());
            }
        }
        cluster += 1;
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent reference: neighbor counting plus connected components
    /// over core points, borders assigned to the lowest claiming cluster.
    pub(crate) fn dbscan_bruteforce(points: &[Vec<f64>], params: &DbscanParams) -> Vec<DbLabel> {
        let n = points.len();
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| euclidean(&points[i], &points[j]) <= params.epsilon)
                    .collect()
            })
            .collect();
        let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= params.min_pts).collect();

        // Union-find over core points within epsilon of each other.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        for i in 0..n {
            if !core[i] {
                continue;
            }
            for &j in &neighbors[i] {
                if core[j] {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        // Number components by their smallest core index (scan order).
        let mut cluster_of_root: std::collections::BTreeMap<usize, usize> = Default::default();
        let mut next = 0;
        for i in 0..n {
            if core[i] {
                let r = find(&mut parent, i);
                cluster_of_root.entry(r).or_insert_with(|| {
                    let c = next;
                    next += 1;
                    c
                });
            }
        }
        let mut labels = vec![DbLabel::Noise; n];
        for i in 0..n {
            if core[i] {
                let r = find(&mut parent, i);
                labels[i] = DbLabel::Core(cluster_of_root[&r]);
            }
        }
        for i in 0..n {
            if core[i] {
                continue;
            }
            let claim = neighbors[i]
                .iter()
                .filter(|&&j| core[j])
                .map(|&j| cluster_of_root[&find(&mut parent, j)])
                .min();
            if let Some(c) = claim {
                labels[i] = DbLabel::Border(c);
            }
        }
        labels
    }

    /// Same-cluster relation plus noise sets must agree; cluster numbering
    /// may differ.
    pub(crate) fn label_isomorphic(a: &[DbLabel], b: &[DbLabel]) -> bool {
        if a.len() != b.len() {
            return false;
        }
        for i in 0..a.len() {
            if a[i].is_noise() != b[i].is_noise() {
                return false;
            }
            for j in (i + 1)..a.len() {
                let same_a = a[i].cluster().is_some() && a[i].cluster() == a[j].cluster();
                let same_b = b[i].cluster().is_some() && b[i].cluster() == b[j].cluster();
                if same_a != same_b {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn identical_points_form_one_cluster() {
        let points = vec![vec![1.0, 2.0]; 6];
        let labels = dbscan(
            &points,
            &DbscanParams {
                epsilon: 0.5,
                min_pts: 4,
            },
        )
        .unwrap();
        assert!(labels.iter().all(|l| *l == DbLabel::Core(0)));
    }

    #[test]
    fn two_blobs_and_a_far_point() {
        let mut points = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            points.push(vec![rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)]);
        }
        for _ in 0..20 {
            points.push(vec![
                5.0 + rng.random_range(-0.1..0.1),
                5.0 + rng.random_range(-0.1..0.1),
            ]);
        }
        points.push(vec![50.0, -50.0]);
        let params = DbscanParams {
            epsilon: 0.5,
            min_pts: 4,
        };
        let labels = dbscan(&points, &params).unwrap();
        let clusters: std::collections::BTreeSet<usize> =
            labels.iter().filter_map(|l| l.cluster()).collect();
        assert_eq!(clusters.len(), 2);
        assert!(labels[40].is_noise());
        assert!(label_isomorphic(&labels, &dbscan_bruteforce(&points, &params)));
    }

    #[test]
    fn agrees_with_bruteforce_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..40 {
            let n = rng.random_range(5..60);
            let dim = rng.random_range(1..4);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let params = DbscanParams {
                epsilon: rng.random_range(0.05..0.8),
                min_pts: rng.random_range(2..6),
            };
            let fast = dbscan(&points, &params).unwrap();
            let slow = dbscan_bruteforce(&points, &params);
            assert!(
                label_isomorphic(&fast, &slow),
                "case {case}: {fast:?} vs {slow:?}"
            );
        }
    }

    #[test]
    fn k_distance_heuristic_produces_valid_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let points: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let params = DbscanParams::from_k_distance(&points, 5).unwrap();
        assert!(params.epsilon > 0.0);
        assert_eq!(params.min_pts, 5);
        dbscan(&points, &params).unwrap();
    }

    #[test]
    fn rejects_invalid_params() {
        let points = vec![vec![0.0]];
        assert!(dbscan(&points, &DbscanParams { epsilon: 0.0, min_pts: 1 }).is_err());
        assert!(dbscan(&points, &DbscanParams { epsilon: 1.0, min_pts: 0 }).is_err());
        assert!(dbscan(&[], &DbscanParams { epsilon: 1.0, min_pts: 1 }).is_err());
    }
}

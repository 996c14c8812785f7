//! One-class support vector machine with an RBF kernel.
//!
//! Solves the standard one-class dual
//!
//! ```text
//!   min  1/2 a' Q a    s.t.  0 <= a_i <= 1,  sum(a) = nu * n
//! ```
//!
//! with `Q_ij = exp(-gamma * ||x_i - x_j||^2)`, by deterministic
//! maximal-violating-pair coordinate updates. The boundary fraction `nu`
//! bounds the share of training points left outside the fitted region: at
//! convergence a point can only score negative if its multiplier sits at the
//! upper bound, and at most `nu * n` multipliers can be there.

use crate::error::{Error, Result};
use crate::linalg::euclidean;

/// RBF bandwidth choice.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// `gamma = 1 / (2 * median^2)` with the median taken over pairwise
    /// training distances. Falls back to 1.0 for degenerate sets.
    MedianHeuristic,
    /// Explicit RBF `gamma`.
    Gamma(f64),
}

/// Fitted one-class boundary.
///
/// `decision(x) = sum_i coef_i * K(sv_i, x) - rho`; a vector is a member of
/// the class iff the decision value is non-negative.
#[derive(Debug, Clone)]
pub struct OneClassSvm {
    support_vectors: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    rho: f64,
    gamma: f64,
    dim: usize,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d = euclidean(a, b);
    (-gamma * d * d).exp()
}

fn median_gamma(points: &[Vec<f64>]) -> f64 {
    let mut dists = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = euclidean(&points[i], &points[j]);
            if d > 0.0 {
                dists.push(d);
            }
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    let median = crate::linalg::percentile(&dists, 50.0);
    1.0 / (2.0 * median * median)
}

/// Fits the one-class boundary on `points`.
pub fn fit_one_class(points: &[Vec<f64>], nu: f64, bandwidth: Bandwidth) -> Result<OneClassSvm> {
    if points.is_empty() {
        return Err(Error::Data("one-class fit on an empty set".into()));
    }
    if !(0.0 < nu && nu <= 1.0) {
        return Err(Error::Config(format!("nu must be in (0, 1], got {nu}")));
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(Error::Shape("inconsistent vector dimensions".into()));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite training vector".into()));
        }
    }
    let gamma = match bandwidth {
        Bandwidth::MedianHeuristic => median_gamma(points),
        Bandwidth::Gamma(g) => {
            if g <= 0.0 || !g.is_finite() {
                return Err(Error::Config(format!("gamma must be positive, got {g}")));
            }
            g
        }
    };

    let n = points.len();
    let budget = nu * n as f64;
    // Kernel matrix; the ground sets this sees are small.
    let mut q = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let k = rbf(gamma, &points[i], &points[j]);
            q[i * n + j] = k;
            q[j * n + i] = k;
        }
    }

    // libsvm-style start: fill multipliers up to the budget in index order.
    let mut alpha = vec![0.0f64; n];
    let mut remaining = budget;
    for a in alpha.iter_mut() {
        if remaining >= 1.0 {
            *a = 1.0;
            remaining -= 1.0;
        } else {
            *a = remaining;
            break;
        }
    }

    // gradient g = Q * alpha.
    let mut grad = vec![0.0f64; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += q[i * n + j] * alpha[j];
        }
        grad[i] = acc;
    }

    let tol = 1e-9;
    let max_iter = 200_000.max(100 * n);
    for _ in 0..max_iter {
        // Most violating pair: raise the smallest gradient among raisable
        // multipliers, lower the largest among lowerable ones.
        let mut up: Option<usize> = None;
        let mut down: Option<usize> = None;
        for i in 0..n {
            if alpha[i] < 1.0 && up.is_none_or(|u| grad[i] < grad[u]) {
                up = Some(i);
            }
            if alpha[i] > 0.0 && down.is_none_or(|d| grad[i] > grad[d]) {
                down = Some(i);
            }
        }
        let (u, d) = match (up, down) {
            (Some(u), Some(d)) => (u, d),
            _ => break,
        };
        let violation = grad[d] - grad[u];
        if violation <= tol {
            break;
        }
        let curvature = (q[u * n + u] + q[d * n + d] - 2.0 * q[u * n + d]).max(1e-12);
        let step = (violation / curvature)
            .min(alpha[d])
            .min(1.0 - alpha[u]);
        if step <= 0.0 {
            break;
        }
        alpha[u] += step;
        alpha[d] -= step;
        for j in 0..n {
            grad[j] += step * (q[j * n + u] - q[j * n + d]);
        }
    }

    // Offset from the KKT conditions. Free multipliers sit on the boundary;
    // taking their minimum keeps boundary points members under roundoff.
    let free: Vec<f64> = (0..n)
        .filter(|&i| alpha[i] > 1e-8 && alpha[i] < 1.0 - 1e-8)
        .map(|i| grad[i])
        .collect();
    let rho = if !free.is_empty() {
        free.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        let upper = (0..n)
            .filter(|&i| alpha[i] >= 1.0 - 1e-8)
            .map(|i| grad[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let lower = (0..n)
            .filter(|&i| alpha[i] <= 1e-8)
            .map(|i| grad[i])
            .fold(f64::INFINITY, f64::min);
        match (upper.is_finite(), lower.is_finite()) {
            (true, true) => 0.5 * (upper + lower),
            (true, false) => upper,
            (false, true) => lower,
            (false, false) => 0.0,
        }
    };

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for i in 0..n {
        if alpha[i] > 1e-12 {
            support_vectors.push(points[i].clone());
            coefficients.push(alpha[i]);
        }
    }
    Ok(OneClassSvm {
        support_vectors,
        coefficients,
        rho,
        gamma,
        dim,
    })
}

impl OneClassSvm {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n_support(&self) -> usize {
        self.support_vectors.len()
    }

    /// Signed distance-like score; non-negative means member.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Shape(format!(
                "query dimension {} does not match model dimension {}",
                x.len(),
                self.dim
            )));
        }
        let mut acc = 0.0;
        for (sv, c) in self.support_vectors.iter().zip(&self.coefficients) {
            acc += c * rbf(self.gamma, sv, x);
        }
        Ok(acc - self.rho)
    }

    pub fn is_member(&self, x: &[f64]) -> Result<bool> {
        Ok(self.decision(x)? >= 0.0)
    }
}

/// Scores a batch of vectors against a fitted boundary.
pub fn score_membership(model: &OneClassSvm, vectors: &[Vec<f64>]) -> Result<Vec<bool>> {
    vectors.iter().map(|v| model.is_member(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_cloud(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        // Box-Muller.
                        let u1: f64 = rng.random_range(1e-12..1.0);
                        let u2: f64 = rng.random_range(0.0..1.0);
                        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn single_point_is_its_own_member() {
        let p = vec![vec![0.3, -0.7]];
        let m = fit_one_class(&p, 0.5, Bandwidth::MedianHeuristic).unwrap();
        assert!(m.is_member(&p[0]).unwrap());
    }

    #[test]
    fn nu_bounds_training_outliers_on_gaussian_cloud() {
        let points = gaussian_cloud(50, 2, 3);
        let m = fit_one_class(&points, 0.1, Bandwidth::MedianHeuristic).unwrap();
        let outliers = points
            .iter()
            .filter(|p| !m.is_member(p).unwrap())
            .count();
        // nu = 0.1 on 50 points: a handful outside, never the bulk.
        assert!(
            (1..=15).contains(&outliers),
            "expected 1..=15 outliers, got {outliers}"
        );
    }

    #[test]
    fn far_query_is_not_a_member() {
        let points = gaussian_cloud(40, 3, 5);
        let radius = points
            .iter()
            .map(|p| euclidean(p, &vec![0.0; 3]))
            .fold(0.0f64, f64::max);
        let m = fit_one_class(&points, 0.1, Bandwidth::MedianHeuristic).unwrap();
        let far = vec![10.0 * radius, 0.0, 0.0];
        assert!(!m.is_member(&far).unwrap());
    }

    #[test]
    fn scoring_fit_set_respects_nu_plus_slack() {
        for nu in [0.05, 0.1, 0.2] {
            let points = gaussian_cloud(200, 3, 11);
            let m = fit_one_class(&points, nu, Bandwidth::MedianHeuristic).unwrap();
            let flags = score_membership(&m, &points).unwrap();
            let outlier_fraction =
                flags.iter().filter(|&&f| !f).count() as f64 / points.len() as f64;
            assert!(
                outlier_fraction <= nu + 2.0 / 200.0,
                "nu {nu}: outlier fraction {outlier_fraction}"
            );
        }
    }

    #[test]
    fn free_support_vectors_are_members() {
        let points = gaussian_cloud(60, 2, 7);
        let m = fit_one_class(&points, 0.2, Bandwidth::MedianHeuristic).unwrap();
        // Every support vector with a multiplier strictly inside (0, 1) sits
        // on or inside the boundary.
        for (sv, &c) in m.support_vectors.iter().zip(&m.coefficients) {
            if c < 1.0 - 1e-8 {
                assert!(m.is_member(sv).unwrap());
            }
        }
    }

    #[test]
    fn deterministic_fit() {
        let points = gaussian_cloud(30, 2, 9);
        let a = fit_one_class(&points, 0.1, Bandwidth::MedianHeuristic).unwrap();
        let b = fit_one_class(&points, 0.1, Bandwidth::MedianHeuristic).unwrap();
        assert_eq!(a.rho, b.rho);
        assert_eq!(a.coefficients, b.coefficients);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(fit_one_class(&[], 0.1, Bandwidth::MedianHeuristic).is_err());
        let p = vec![vec![0.0, 1.0]];
        assert!(fit_one_class(&p, 0.0, Bandwidth::MedianHeuristic).is_err());
        assert!(fit_one_class(&p, 1.5, Bandwidth::MedianHeuristic).is_err());
        assert!(fit_one_class(&p, 0.5, Bandwidth::Gamma(-1.0)).is_err());
        let m = fit_one_class(&p, 0.5, Bandwidth::Gamma(1.0)).unwrap();
        assert!(m.decision(&[0.0]).is_err());
    }
}

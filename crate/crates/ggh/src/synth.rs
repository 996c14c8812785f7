//! Synthetic regression datasets for benchmarks, examples, and the
//! acceptance suite. All generators are deterministic under their seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::DataMatrix;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Independent standard-normal points, for boundary-fitting tests.
pub fn gaussian_cloud(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| normal(&mut rng)).collect())
        .collect()
}

/// The discrete levels of the determinant column in
/// [`hypothesis_benchmark`]; useful as oracle class values.
pub const BENCHMARK_LEVELS: [f64; 4] = [-1.2, -0.4, 0.4, 1.2];

/// Regression data where a discrete column strongly determines the target.
///
/// Columns `x1, x2, x3` are uniform on `[-1, 1]`; `level` takes one of four
/// values; the target depends on the level with a dominant coefficient, so
/// hypotheses about a hidden level are clearly right or wrong. Masking the
/// `level` column turns this into a benchmark with a known oracle.
pub fn hypothesis_benchmark(n_rows: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let x1: f64 = rng.random_range(-1.0..1.0);
        let x2: f64 = rng.random_range(-1.0..1.0);
        let x3: f64 = rng.random_range(-1.0..1.0);
        let level = BENCHMARK_LEVELS[rng.random_range(0..BENCHMARK_LEVELS.len())];
        let y = 1.5 * level + 0.8 * x1 - 0.6 * x2 + 0.4 * x1 * x3 + 0.05 * normal(&mut rng);
        values.push(vec![x1, x2, x3, level, y]);
    }
    DataMatrix {
        column_names: vec![
            "x1".into(),
            "x2".into(),
            "x3".into(),
            "level".into(),
            "target".into(),
        ],
        missing: vec![vec![false; 5]; n_rows],
        values,
        target: 4,
        standardization: None,
    }
}

/// Clean nonlinear regression data for the noise-filtering benchmark.
pub fn noise_benchmark(n_rows: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let x1: f64 = rng.random_range(-1.0..1.0);
        let x2: f64 = rng.random_range(-1.0..1.0);
        let x3: f64 = rng.random_range(-1.0..1.0);
        let x4: f64 = rng.random_range(-1.0..1.0);
        let y = x1 - 0.7 * x2 + 0.5 * x3 * x4 + 0.3 * x2 * x2 + 0.05 * normal(&mut rng);
        values.push(vec![x1, x2, x3, x4, y]);
    }
    DataMatrix {
        column_names: vec![
            "x1".into(),
            "x2".into(),
            "x3".into(),
            "x4".into(),
            "target".into(),
        ],
        missing: vec![vec![false; 5]; n_rows],
        values,
        target: 4,
        standardization: None,
    }
}

/// Low-rank ground truth `u v^T` for imputer recovery tests.
pub fn rank_one_matrix(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..rows).map(|_| rng.random_range(0.5..2.0)).collect();
    let v: Vec<f64> = (0..cols).map(|_| rng.random_range(0.5..2.0)).collect();
    u.iter()
        .map(|&ui| v.iter().map(|&vj| ui * vj).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(hypothesis_benchmark(50, 3), hypothesis_benchmark(50, 3));
        assert_eq!(noise_benchmark(50, 3), noise_benchmark(50, 3));
        assert_eq!(gaussian_cloud(10, 2, 1), gaussian_cloud(10, 2, 1));
    }

    #[test]
    fn benchmark_levels_are_the_only_level_values() {
        let d = hypothesis_benchmark(200, 9);
        for row in &d.values {
            assert!(BENCHMARK_LEVELS.contains(&row[3]));
        }
    }
}

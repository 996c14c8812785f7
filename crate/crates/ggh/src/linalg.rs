//! Small dense linear-algebra helpers used by the imputers and the
//! embedding projection. Everything here is plain `Vec<f64>` based; the
//! matrices involved are small (datasets have few columns).

use crate::error::{Error, Result};

/// Euclidean distance between two equal-length vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Percentile with linear interpolation between order statistics.
///
/// `p` is in `[0, 100]`. Sorts a copy of the input.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (p / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        let t = rank - lo as f64;
        v[lo] * (1.0 - t) + v[hi] * t
    }
}

/// Quantile over `values` at fraction `q` in `[0, 1]` (linear interpolation).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    percentile(values, q * 100.0)
}

/// Row-major dense matrix, only as capable as the imputers need it to be.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Thin SVD `A = U * diag(s) * V^T` by one-sided Jacobi rotations.
///
/// Returns `(u, s, v)` with `u` of shape `(rows, k)`, `v` of shape
/// `(cols, k)`, `k = min(rows, cols)`, singular values sorted descending.
/// Intended for the small matrices the imputers see; cost is
/// O(sweeps * cols^2 * rows).
pub fn svd(a: &Mat) -> (Mat, Vec<f64>, Mat) {
    if a.rows < a.cols {
        let (u, s, v) = svd(&a.transpose());
        return (v, s, u);
    }
    let m = a.rows;
    let n = a.cols;
    // Work on columns of a copy; accumulate rotations into v.
    let mut w = a.clone();
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }

    let eps = 1e-12;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for r in 0..m {
                    let x = w.get(r, p);
                    let y = w.get(r, q);
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                off = off.max(apq.abs() / (app * aqq).sqrt().max(1e-300));
                if apq.abs() <= eps * (app * aqq).sqrt() {
                    continue;
                }
                // Jacobi rotation zeroing the (p,q) entry of W^T W.
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..m {
                    let x = w.get(r, p);
                    let y = w.get(r, q);
                    w.set(r, p, c * x - s * y);
                    w.set(r, q, s * x + c * y);
                }
                for r in 0..n {
                    let x = v.get(r, p);
                    let y = v.get(r, q);
                    v.set(r, p, c * x - s * y);
                    v.set(r, q, s * x + c * y);
                }
            }
        }
        if off < eps {
            break;
        }
    }

    // Column norms are the singular values.
    let mut order: Vec<usize> = (0..n).collect();
    let mut sigma = vec![0.0f64; n];
    for (j, s) in sigma.iter_mut().enumerate() {
        let mut norm = 0.0;
        for r in 0..m {
            norm += w.get(r, j) * w.get(r, j);
        }
        *s = norm.sqrt();
    }
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());

    let mut u = Mat::zeros(m, n);
    let mut vs = Mat::zeros(n, n);
    let mut s_sorted = vec![0.0f64; n];
    for (dst, &src) in order.iter().enumerate() {
        s_sorted[dst] = sigma[src];
        if sigma[src] > 0.0 {
            for r in 0..m {
                u.set(r, dst, w.get(r, src) / sigma[src]);
            }
        }
        for r in 0..n {
            vs.set(r, dst, v.get(r, src));
        }
    }
    (u, s_sorted, vs)
}

/// Solves the linear system `a * x = b` by Gaussian elimination with
/// partial pivoting. `a` is consumed as a working copy.
pub fn solve(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(Error::Shape(format!(
            "solve expects square system, got {}x{} with rhs {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        // Partial pivot.
        let mut pivot = col;
        for r in (col + 1)..n {
            if m.get(r, col).abs() > m.get(pivot, col).abs() {
                pivot = r;
            }
        }
        if m.get(pivot, col).abs() < 1e-12 {
            return Err(Error::Numeric("singular system in linear solve".into()));
        }
        if pivot != col {
            for c in 0..n {
                let tmp = m.get(col, c);
                m.set(col, c, m.get(pivot, c));
                m.set(pivot, c, tmp);
            }
            rhs.swap(col, pivot);
        }
        let diag = m.get(col, col);
        for r in (col + 1)..n {
            let f = m.get(r, col) / diag;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                let v = m.get(r, c) - f * m.get(col, c);
                m.set(r, c, v);
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for c in (col + 1)..n {
            acc -= m.get(col, c) * x[c];
        }
        x[col] = acc / m.get(col, col);
    }
    Ok(x)
}

/// Least squares `min ||a x - b||` via normal equations. Falls back to a
/// tiny ridge term if the normal matrix is numerically singular.
pub fn least_squares(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.cols;
    let mut ata = Mat::zeros(n, n);
    let mut atb = vec![0.0f64; n];
    for r in 0..a.rows {
        for i in 0..n {
            let ai = a.get(r, i);
            atb[i] += ai * b[r];
            for j in i..n {
                let v = ata.get(i, j) + ai * a.get(r, j);
                ata.set(i, j, v);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            ata.set(i, j, ata.get(j, i));
        }
    }
    match solve(&ata, &atb) {
        Ok(x) => Ok(x),
        Err(_) => {
            let scale = (0..n).map(|i| ata.get(i, i)).fold(0.0f64, f64::max);
            let ridge = 1e-10 * scale.max(1.0);
            let mut reg = ata.clone();
            for i in 0..n {
                reg.set(i, i, reg.get(i, i) + ridge);
            }
            solve(&reg, &atb)
        }
    }
}

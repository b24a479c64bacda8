//! Singular values and null spaces by one-sided (Hestenes) Jacobi.

use super::matrix::{dot, norm2, Matrix};
use crate::error::{Error, Result};
use crate::tol;

const MAX_SVD_SWEEPS: usize = 100;

/// Thin singular value decomposition `M = U·diag(σ)·Vᵀ`.
///
/// `u` is `rows×cols`, `v` is `cols×cols`; singular values are sorted in
/// non-increasing order and columns of `u` for zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Singular values at or below this count as zero.
    pub fn threshold(&self) -> f64 {
        tol::rank_threshold(self.sigma_max())
    }

    pub fn rank(&self) -> usize {
        let thr = self.threshold();
        self.sigma.iter().filter(|s| **s > thr).count()
    }

    /// Orthonormal basis of the null space of `M`, as vectors of length `cols`.
    pub fn null_space(&self) -> Vec<Vec<f64>> {
        let r = self.rank();
        (r..self.sigma.len()).map(|k| self.v.column(k)).collect()
    }

    /// Orthonormal basis of the column space of `M`.
    pub fn range(&self) -> Vec<Vec<f64>> {
        (0..self.rank()).map(|k| self.u.column(k)).collect()
    }
}

/// One-sided Jacobi SVD. Works for any shape; cost grows with `cols²·rows`.
pub fn svd(m: &Matrix) -> Result<Svd> {
    let rows = m.rows();
    let cols = m.cols();
    // work on columns stored contiguously
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    let eps = f64::EPSILON;
    // columns below this squared norm are numerically zero and left alone
    let frob2: f64 = w.iter().map(|c| dot(c, c)).sum();
    let floor = (eps * eps * frob2).max(f64::MIN_POSITIVE);
    let mut converged = cols <= 1;
    let mut last_off = 0.0_f64;
    for _ in 0..MAX_SVD_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        last_off = 0.0;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let rel = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                last_off = last_off.max(rel);
                if rel <= eps {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (wp, wq) = pair_mut(&mut w, p, q);
                rotate(wp, wq, c, s);
                let (vp, vq) = pair_mut(&mut v, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure { what: "Jacobi SVD".into(), residual: last_off });
    }

    let sig: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]).then(i.cmp(&j)));
    let mut u = Matrix::zeros(rows, cols);
    let mut vm = Matrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (k, &j) in order.iter().enumerate() {
        let s = sig[j];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..rows {
                u[(i, k)] = w[j][i] / s;
            }
        }
        for i in 0..cols {
            vm[(i, k)] = v[j][i];
        }
    }
    Ok(Svd { u, sigma, v: vm })
}

fn pair_mut(v: &mut [Vec<f64>], p: usize, q: usize) -> (&mut Vec<f64>, &mut Vec<f64>) {
    debug_assert!(p < q);
    let (a, b) = v.split_at_mut(q);
    (&mut a[p], &mut b[0])
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let xa = *a;
        let yb = *b;
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Numerical rank under the global tolerance.
pub fn rank(m: &Matrix) -> Result<usize> {
    Ok(svd(m)?.rank())
}

//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use serde::{Deserialize, Serialize};

use super::matrix::{Matrix, SymMatrix};
use crate::error::{Error, Result};

/// Maximum number of full Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Ordered spectral decomposition `X = Uᵀ·diag(λ)·U`.
///
/// Row `k` of `u` is the unit eigenvector for `lambda[k]`; eigenvalues are
/// non-increasing. Each eigenvector's first component with magnitude above
/// `1e-10` is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomp {
    pub u: Matrix,
    pub lambda: Vec<f64>,
}

impl EigenDecomp {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// `Uᵀ·diag(d)·U` for an arbitrary spectrum `d`.
    pub fn reconstruct_with(&self, d: &[f64]) -> SymMatrix {
        assert_eq!(d.len(), self.dim());
        let n = self.dim();
        SymMatrix::from_upper_fn(n, |i, j| {
            let mut acc = 0.0;
            for (k, dk) in d.iter().enumerate() {
                if *dk != 0.0 {
                    acc += self.u[(k, i)] * dk * self.u[(k, j)];
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(&self.lambda)
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        self.u.row(k)
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.first().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.lambda_max().abs().max(self.lambda_min().abs())
    }

    /// Number of eigenvalues above the global rank threshold.
    pub fn rank(&self) -> usize {
        let thr = crate::tol::rank_threshold(self.spectral_norm());
        self.lambda.iter().filter(|l| l.abs() > thr).count()
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// Uses the classical cyclic Jacobi method with threshold sweeps: the first
/// three sweeps only rotate entries above a fraction of the off-diagonal
/// mass, later sweeps drop entries that are negligible next to both diagonal
/// entries. Output is deterministic for identical input.
pub fn eig_sym(x: &SymMatrix) -> Result<EigenDecomp> {
    let n = x.dim();
    let mut a = x.to_dense();
    let mut v = Matrix::identity(n);
    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    let mut converged = n <= 1;
    for sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n).flat_map(|p| ((p + 1)..n).map(move |q| (p, q))).map(|(p, q)| a[(p, q)].abs()).sum();
        if off == 0.0 {
            converged = true;
            break;
        }
        let thresh = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = 100.0 * apq.abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[(p, q)] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let hh = t * apq;
                z[p] -= hh;
                z[q] += hh;
                d[p] -= hh;
                d[q] += hh;
                a[(p, q)] = 0.0;
                let rot = |a: &mut Matrix, i1: (usize, usize), i2: (usize, usize)| {
                    let g = a[i1];
                    let h = a[i2];
                    a[i1] = g - s * (h + g * tau);
                    a[i2] = h + s * (g - h * tau);
                };
                for j in 0..p {
                    rot(&mut a, (j, p), (j, q));
                }
                for j in (p + 1)..q {
                    rot(&mut a, (p, j), (j, q));
                }
                for j in (q + 1)..n {
                    rot(&mut a, (p, j), (q, j));
                }
                for j in 0..n {
                    rot(&mut v, (j, p), (j, q));
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum::<f64>()
            .sqrt();
        return Err(Error::NumericalFailure { what: "Jacobi eigensolver".into(), residual: off });
    }

    // columns of v are eigenvectors; sort by value desc, index asc
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    let mut u = Matrix::zeros(n, n);
    let lambda: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    for (row, &k) in order.iter().enumerate() {
        let sign = (0..n).map(|i| v[(i, k)]).find(|c| c.abs() > 1e-10).map_or(1.0, f64::signum);
        for i in 0..n {
            u[(row, i)] = sign * v[(i, k)];
        }
    }
    Ok(EigenDecomp { u, lambda })
}

/// Eigenvalues of `x` in non-increasing order.
pub fn eigenvalues(x: &SymMatrix) -> Result<Vec<f64>> {
    Ok(eig_sym(x)?.lambda)
}

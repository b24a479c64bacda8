use serde::{Deserialize, Serialize};

use super::eigen::eig_sym;
use super::matrix::{dot, norm2, Matrix, SymMatrix};
use super::svd::svd;
use crate::error::{dim_mismatch, Result};

/// Linear subspace of `R^n` held as an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
}

impl Subspace {
    /// Span of the given vectors; dependent vectors are dropped under the
    /// global rank tolerance.
    pub fn span(ambient_dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(dim_mismatch(format!("vector of length {} in a subspace of R^{ambient_dim}", bad.len())));
        }
        if vectors.is_empty() {
            return Ok(Self { ambient_dim, basis: Vec::new() });
        }
        let cols = Matrix::from_fn(ambient_dim, vectors.len(), |i, j| vectors[j][i]);
        let basis = svd(&cols)?.range();
        Ok(Self { ambient_dim, basis })
    }

    /// Row space of `a`, i.e. `range aᵀ`.
    pub fn row_space(a: &Matrix) -> Result<Self> {
        Self::span(a.cols(), &a.to_rows())
    }

    pub fn whole(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut e = vec![0.0; ambient_dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Self { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        for b in &self.basis {
            let c = dot(b, x);
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }

    /// Distance from `x` to the subspace.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let p = self.project(x);
        norm2(&super::matrix::sub(x, &p))
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Result<Subspace> {
        let n = self.ambient_dim;
        let proj = SymMatrix::from_upper_fn(n, |i, j| {
            let e = if i == j { 1.0 } else { 0.0 };
            e - self.basis.iter().map(|b| b[i] * b[j]).sum::<f64>()
        });
        let eig = eig_sym(&proj)?;
        let keep = n - self.dim();
        let basis = (0..keep).map(|k| eig.eigenvector(k).to_vec()).collect();
        Ok(Subspace { ambient_dim: n, basis })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_drops_dependent_vectors() {
        let v = Subspace::span(3, &[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(v.dim(), 2);
        for (i, a) in v.basis().iter().enumerate() {
            for (j, b) in v.basis().iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - expect).abs() < 1e-10);
            }
        }
        assert!(v.distance(&[3.0, 3.0, -1.0]) < 1e-12);
        assert!((v.distance(&[1.0, -1.0, 0.0]) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn complement_is_orthogonal() {
        let v = Subspace::span(4, &[vec![1.0, 2.0, 0.0, -1.0], vec![0.0, 1.0, 1.0, 1.0]]).unwrap();
        let c = v.complement().unwrap();
        assert_eq!(c.dim(), 2);
        for a in v.basis() {
            for b in c.basis() {
                assert!(dot(a, b).abs() < 1e-10);
            }
        }
        assert_eq!(Subspace::whole(3).complement().unwrap().dim(), 0);
    }

    #[test]
    fn rejects_wrong_lengths() {
        assert!(Subspace::span(2, &[vec![1.0, 2.0, 3.0]]).is_err());
    }
}

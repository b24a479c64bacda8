//! Small dense linear algebra: symmetric eigendecomposition, SVD, subspaces,
//! a phase-1 LP kernel and elementwise helpers.

mod eigen;
mod matrix;
mod simplex;
mod subspace;
mod svd;

pub use eigen::{eig_sym, eigenvalues, EigenDecomp, MAX_SWEEPS};
pub use matrix::{dist, dot, norm2, sub, Matrix, SymMatrix};
pub use simplex::{phase_one, PhaseOne, FEASIBILITY_MARGIN};
pub use subspace::Subspace;
pub use svd::{rank, svd, Svd};

use crate::error::{dim_mismatch, Error, Result};

/// Pivot budget for [`lp_cone_nontrivial`].
pub const LP_MAX_PIVOTS: usize = 50_000;

/// Pointwise product `x ⊙ y`.
pub fn hadamard(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(dim_mismatch(format!("hadamard of lengths {} and {}", x.len(), y.len())));
    }
    Ok(x.iter().zip(y).map(|(a, b)| a * b).collect())
}

/// Entries of `x` in non-increasing order.
pub fn sort_desc(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn check_coords(n: usize, coords: &[usize]) -> Result<()> {
    match coords.iter().find(|&&c| c >= n) {
        Some(c) => Err(Error::OutOfRange(format!("coordinate {c} in R^{n}"))),
        None => Ok(()),
    }
}

/// `dim(V ∩ {y : y_j = 0 for all j ∉ coords})`.
pub fn null_intersection_dim(v: &Subspace, coords: &[usize]) -> Result<usize> {
    Ok(intersect_coordinate_subspace(v, coords)?.len())
}

/// Orthonormal basis (in ambient coordinates) of `V ∩ {y : supp y ⊆ coords}`.
pub fn intersect_coordinate_subspace(v: &Subspace, coords: &[usize]) -> Result<Vec<Vec<f64>>> {
    let n = v.ambient_dim();
    check_coords(n, coords)?;
    let k = v.dim();
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut inside = vec![false; n];
    for &c in coords {
        inside[c] = true;
    }
    let outside: Vec<usize> = (0..n).filter(|&j| !inside[j]).collect();
    let basis = v.basis();
    let coeffs: Vec<Vec<f64>> = if outside.is_empty() {
        (0..k)
            .map(|i| {
                let mut e = vec![0.0; k];
                e[i] = 1.0;
                e
            })
            .collect()
    } else {
        let m = Matrix::from_fn(outside.len(), k, |r, c| basis[c][outside[r]]);
        svd(&m)?.null_space()
    };
    Ok(coeffs
        .iter()
        .map(|c| {
            let mut y = vec![0.0; n];
            for (ci, b) in c.iter().zip(basis) {
                for (yj, bj) in y.iter_mut().zip(b) {
                    *yj += ci * bj;
                }
            }
            // exact zeros where the constraint says so
            for &j in &outside {
                y[j] = 0.0;
            }
            y
        })
        .collect())
}

/// Whether `V` contains a nonzero `y ≥ 0` with `y_j = 0` on `zero_coords`.
pub fn lp_cone_nontrivial(v: &Subspace, zero_coords: &[usize]) -> Result<bool> {
    Ok(lp_cone_witness(v, zero_coords)?.is_some())
}

/// A point of `{y ∈ V, y ≥ 0, y|zero_coords = 0, Σy = 1}` if one exists.
pub fn lp_cone_witness(v: &Subspace, zero_coords: &[usize]) -> Result<Option<Vec<f64>>> {
    let n = v.ambient_dim();
    check_coords(n, zero_coords)?;
    let mut zero = vec![false; n];
    for &c in zero_coords {
        zero[c] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&j| !zero[j]).collect();
    if free.is_empty() || v.dim() == 0 {
        return Ok(None);
    }
    // y ∈ V  ⟺  W·y = 0 for an orthonormal basis W of V⊥
    let comp = v.complement()?;
    let rows = comp.dim() + 1;
    let a = Matrix::from_fn(rows, free.len(), |r, c| if r < comp.dim() { comp.basis()[r][free[c]] } else { 1.0 });
    let mut b = vec![0.0; rows];
    b[rows - 1] = 1.0;
    match phase_one(&a, &b, LP_MAX_PIVOTS)? {
        PhaseOne::Infeasible { .. } => Ok(None),
        PhaseOne::Feasible(x) => {
            let mut y = vec![0.0; n];
            for (xi, &j) in x.iter().zip(&free) {
                y[j] = *xi;
            }
            Ok(Some(y))
        }
    }
}

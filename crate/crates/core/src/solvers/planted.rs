use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Sparse nonnegative linear system `Ax = b` with a known solution in `K_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSparse {
    pub s: usize,
    pub a: Matrix,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
}

/// `A` is `(2s+1)×m` standard Gaussian; `x_true` has `s` entries drawn
/// uniformly from `[1, 2]` on a uniformly random support.
pub fn planted_sparse(m: usize, s: usize, seed: u64) -> Result<PlantedSparse> {
    if s == 0 || s > m {
        return Err(Error::InvalidInput(format!("planted instance needs 1 ≤ s ≤ m, got s = {s}, m = {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = 2 * s + 1;
    let a = Matrix::from_fn(p, m, |_, _| rng.sample(StandardNormal));
    let mut idx: Vec<usize> = (0..m).collect();
    for i in 0..s {
        let j = rng.random_range(i..m);
        idx.swap(i, j);
    }
    let mut x_true = vec![0.0; m];
    for &j in &idx[..s] {
        x_true[j] = rng.random_range(1.0..=2.0);
    }
    let b = a.matvec(&x_true)?;
    Ok(PlantedSparse { s, a, b, x_true })
}

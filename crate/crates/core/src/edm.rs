//! Low-rank Euclidean distance matrix completion.
//!
//! An EDM on `n = m+1` points is handled through the Householder map
//! `G(X) = Q(−X)Q`, whose upper-left `m×m` block `X̂` is PSD exactly when `X`
//! is an EDM and has rank equal to the embedding dimension.
//!
//! Completion is posed as finding `X ∈ C1 ∩ C2` with
//! `C1 = {X ≥ 0, X_ij = D_ij on the known set I}` and
//! `C2 = {X : X̂ ∈ S_s}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{eig_sym, Matrix, SymMatrix};
use crate::spectral::{normal_cone_ss_contains, proj_ss, psd_tol};
use crate::tol::{rank_threshold, zero_tol, PSD_TOL};

/// The Householder reflection `Q = I − 2vvᵀ/vᵀv`, `v = (1,…,1, 1+√n)`, and
/// the induced map `G(X) = Q(−X)Q` on `S^n`.
///
/// `Q` maps the all-ones vector to `−√n·e_n`, which is what isolates the
/// Gram part of an EDM in the upper-left block.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderG {
    v: Vec<f64>,
    beta: f64,
    q: Matrix,
}

impl HouseholderG {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("Householder map needs n ≥ 1".into()));
        }
        let mut v = vec![1.0; n];
        v[n - 1] = 1.0 + (n as f64).sqrt();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let beta = 2.0 / vv;
        let q = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - beta * v[i] * v[j]);
        Ok(Self { v, beta, q })
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    /// `G(X) = Q(−X)Q`, computed as a rank-two update in `O(n²)`.
    pub fn apply(&self, x: &SymMatrix) -> Result<SymMatrix> {
        let n = self.dim();
        if x.dim() != n {
            return Err(dim_mismatch(format!("G acts on {n}×{n}, got {0}×{0}", x.dim())));
        }
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| x.get(i, j) * self.v[j]).sum()).collect();
        let gamma: f64 = w.iter().zip(&self.v).map(|(a, b)| a * b).sum();
        let (b, v) = (self.beta, &self.v);
        Ok(SymMatrix::from_upper_fn(n, |i, j| {
            -(x.get(i, j) - b * v[i] * w[j] - b * w[i] * v[j] + b * b * gamma * v[i] * v[j])
        }))
    }

    /// Upper-left `(n−1)×(n−1)` block of `G(X)`.
    pub fn x_hat(&self, x: &SymMatrix) -> Result<SymMatrix> {
        Ok(self.apply(x)?.leading_block(self.dim() - 1))
    }
}

/// Outcome of [`is_edm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdmCheck {
    pub is_edm: bool,
    pub embed_dim: usize,
}

fn entry_tol(x: &SymMatrix) -> f64 {
    zero_tol() * (1.0 + x.max_abs())
}

fn check_hollow_nonneg(x: &SymMatrix) -> Result<()> {
    let tol = entry_tol(x);
    let n = x.dim();
    for i in 0..n {
        if x.get(i, i).abs() > tol {
            return Err(Error::InvalidInput(format!("diagonal entry ({i},{i}) = {} is not zero", x.get(i, i))));
        }
        for j in (i + 1)..n {
            if x.get(i, j) < -tol {
                return Err(Error::InvalidInput(format!("entry ({i},{j}) = {} is negative", x.get(i, j))));
            }
        }
    }
    Ok(())
}

/// Whether a hollow nonnegative matrix is an EDM, and its embedding dimension.
pub fn is_edm(x: &SymMatrix) -> Result<EdmCheck> {
    check_hollow_nonneg(x)?;
    if x.dim() <= 1 {
        return Ok(EdmCheck { is_edm: x.dim() == 1, embed_dim: 0 });
    }
    let g = HouseholderG::new(x.dim())?;
    let e = eig_sym(&g.x_hat(x)?)?;
    Ok(EdmCheck { is_edm: e.lambda_min() >= -psd_tol(&e), embed_dim: e.rank() })
}

/// Squared-distance matrix `D_ij = ‖p_i − p_j‖²`.
pub fn build_edm(points: &[Vec<f64>]) -> Result<SymMatrix> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput("no points".into()));
    };
    if let Some(bad) = points.iter().position(|p| p.len() != first.len()) {
        return Err(dim_mismatch(format!("point {bad} has dimension {}, expected {}", points[bad].len(), first.len())));
    }
    Ok(SymMatrix::from_upper_fn(points.len(), |i, j| {
        if i == j {
            0.0
        } else {
            points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum()
        }
    }))
}

/// Points in `R^s` whose squared distances reproduce the EDM `x`.
///
/// Fails unless `x` is an EDM of embedding dimension at most `s`; see
/// [`embed_points`] for the coordinates.
pub fn recover_points(x: &SymMatrix, s: usize) -> Result<Vec<Vec<f64>>> {
    let check = is_edm(x)?;
    if !check.is_edm {
        return Err(Error::Precondition("matrix is not a Euclidean distance matrix".into()));
    }
    if check.embed_dim > s {
        return Err(Error::Precondition(format!("embedding dimension {} exceeds s = {s}", check.embed_dim)));
    }
    embed_points(x, s)
}

/// Points in `R^s` read off the `s` leading eigenpairs of `X̂`.
///
/// The Gram matrix of the rotated, centered points is `X̂/2`, so the top `s`
/// eigenpairs of `X̂` give coordinates `u_k·sqrt(λ_k/2)`; mapping back by `Q`
/// yields points centered at the origin and expressed in principal axes.
/// Each axis is oriented so its first entry above the zero tolerance is
/// positive. Negative eigenvalues are clipped, so any symmetric `x` is
/// accepted; `build_edm` of the result has `X̂` equal to `P_{S_s}(X̂(x))`.
pub fn embed_points(x: &SymMatrix, s: usize) -> Result<Vec<Vec<f64>>> {
    let n = x.dim();
    if n <= 1 {
        return Ok(vec![vec![0.0; s]; n]);
    }
    let g = HouseholderG::new(n)?;
    let e = eig_sym(&g.x_hat(x)?)?;
    let mut coords = vec![vec![0.0; s]; n];
    for k in 0..s.min(n - 1) {
        let scale = (e.lambda[k].max(0.0) / 2.0).sqrt();
        let u = e.eigenvector(k);
        let mut col: Vec<f64> = (0..n).map(|i| (0..n - 1).map(|r| g.q()[(i, r)] * u[r]).sum::<f64>() * scale).collect();
        let thr = rank_threshold(col.iter().fold(0.0_f64, |a, c| a.max(c.abs())));
        if let Some(first) = col.iter().find(|c| c.abs() > thr) {
            if *first < 0.0 {
                col.iter_mut().for_each(|c| *c = -*c);
            }
        }
        for (row, c) in coords.iter_mut().zip(col) {
            row[k] = c;
        }
    }
    Ok(coords)
}

/// A partial EDM: known squared distances on an index set `I` (diagonal
/// always known and zero) and a target embedding dimension `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EdmInstance", into = "EdmInstance")]
pub struct PartialEdm {
    d: SymMatrix,
    known: Vec<(usize, usize)>,
    mask: Vec<bool>,
    s: usize,
    g: HouseholderG,
}

impl PartialEdm {
    /// `entries` are `(i, j, D_ij)` with `i ≠ j`; order within a pair is free.
    pub fn new(n_points: usize, s: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidInput("an EDM instance needs at least one point".into()));
        }
        if s >= n_points {
            return Err(Error::OutOfRange(format!("s = {s} needs at least s+1 = {} points", s + 1)));
        }
        let mut d = SymMatrix::zeros(n_points);
        let mut mask = vec![false; n_points * n_points];
        for i in 0..n_points {
            mask[i * n_points + i] = true;
        }
        for &(a, b, val) in entries {
            let (i, j) = (a.min(b), a.max(b));
            if j >= n_points {
                return Err(Error::OutOfRange(format!("entry ({a},{b}) outside {n_points} points")));
            }
            if i == j {
                if val != 0.0 {
                    return Err(Error::InvalidInput(format!("diagonal entry ({i},{i}) = {val} must be 0")));
                }
                continue;
            }
            if !val.is_finite() || val < 0.0 {
                return Err(Error::InvalidInput(format!("entry ({i},{j}) = {val} must be finite and nonnegative")));
            }
            if mask[i * n_points + j] {
                if d.get(i, j) != val {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) given twice with different values")));
                }
                continue;
            }
            mask[i * n_points + j] = true;
            mask[j * n_points + i] = true;
            d.set(i, j, val);
        }
        let known = (0..n_points)
            .flat_map(|i| ((i + 1)..n_points).map(move |j| (i, j)))
            .filter(|&(i, j)| mask[i * n_points + j])
            .collect();
        Ok(Self { d, known, mask, s, g: HouseholderG::new(n_points)? })
    }

    /// Instance with the entries of `d` at the positions `known` (upper or lower).
    pub fn from_matrix(d: &SymMatrix, s: usize, known: &[(usize, usize)]) -> Result<Self> {
        let n = d.dim();
        if let Some(&(i, j)) = known.iter().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::OutOfRange(format!("entry ({i},{j}) outside {n} points")));
        }
        let entries: Vec<_> = known.iter().map(|&(i, j)| (i, j, d.get(i, j))).collect();
        Self::new(n, s, &entries)
    }

    pub fn n_points(&self) -> usize {
        self.d.dim()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Known values; unknown entries read as zero.
    pub fn d(&self) -> &SymMatrix {
        &self.d
    }

    /// Known off-diagonal positions `(i, j)`, `i < j`, sorted.
    pub fn known(&self) -> &[(usize, usize)] {
        &self.known
    }

    /// Whether `(i, j)` is in `I`; the diagonal always is.
    pub fn is_known(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.n_points() + j]
    }

    pub fn householder(&self) -> &HouseholderG {
        &self.g
    }

    fn check_dim(&self, x: &SymMatrix) -> Result<()> {
        if x.dim() != self.n_points() {
            Err(dim_mismatch(format!("instance has {} points, matrix is {1}×{1}", self.n_points(), x.dim())))
        } else {
            Ok(())
        }
    }

    /// `P_{C1}`: known entries set to `D`, the rest clamped at zero.
    pub fn proj_c1(&self, x: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(x)?;
        Ok(SymMatrix::from_upper_fn(self.n_points(), |i, j| {
            if self.is_known(i, j) {
                self.d.get(i, j)
            } else {
                x.get(i, j).max(0.0)
            }
        }))
    }

    /// `P_{C2}`: project the upper-left block of `G(X)` onto `S_s`, map back.
    pub fn proj_c2(&self, x: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(x)?;
        let n = self.n_points();
        let mut y = self.g.apply(x)?;
        let block = proj_ss(&y.leading_block(n - 1), self.s)?;
        for i in 0..n - 1 {
            for j in i..n - 1 {
                y.set(i, j, block.get(i, j));
            }
        }
        self.g.apply(&y)
    }

    /// `X ∈ C1` up to `PSD_TOL·(1 + max|D|)` on the known entries.
    pub fn in_c1(&self, x: &SymMatrix) -> Result<bool> {
        Ok(self.c1_violation(x)?.is_none())
    }

    fn c1_violation(&self, x: &SymMatrix) -> Result<Option<String>> {
        self.check_dim(x)?;
        let n = self.n_points();
        let tol = PSD_TOL * (1.0 + self.d.max_abs().max(x.max_abs()));
        for i in 0..n {
            for j in i..n {
                if self.is_known(i, j) && (x.get(i, j) - self.d.get(i, j)).abs() > tol {
                    return Ok(Some(format!(
                        "entry ({i},{j}) = {} differs from D = {}",
                        x.get(i, j),
                        self.d.get(i, j)
                    )));
                }
                if x.get(i, j) < -tol {
                    return Ok(Some(format!("entry ({i},{j}) = {} is negative", x.get(i, j))));
                }
            }
        }
        Ok(None)
    }

    pub fn in_c2(&self, x: &SymMatrix) -> Result<bool> {
        self.check_dim(x)?;
        crate::spectral::in_ss(&self.g.x_hat(x)?, self.s)
    }

    /// Check the hypotheses of the EDM regularity theorem at `X̄` and return
    /// `X̂`: hollow, strictly positive off the diagonal, in `C1 ∩ C2`, and
    /// `rank X̂ = s`.
    pub fn validate_solution(&self, xbar: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(xbar)?;
        let n = self.n_points();
        let tol = entry_tol(xbar);
        for i in 0..n {
            if xbar.get(i, i).abs() > tol {
                return Err(Error::Precondition(format!("X̄ is not hollow: entry ({i},{i}) = {}", xbar.get(i, i))));
            }
            for j in (i + 1)..n {
                if xbar.get(i, j) <= tol {
                    return Err(Error::Precondition(format!(
                        "X̄ has a non-positive off-diagonal entry ({i},{j}) = {}",
                        xbar.get(i, j)
                    )));
                }
            }
        }
        if let Some(why) = self.c1_violation(xbar)? {
            return Err(Error::Precondition(format!("X̄ is not in C1: {why}")));
        }
        let x_hat = self.g.x_hat(xbar)?;
        let e = eig_sym(&x_hat)?;
        if e.lambda_min() < -psd_tol(&e) || e.rank() > self.s {
            return Err(Error::Precondition(format!("X̄ is not in C2: X̂ is not in S_{}", self.s)));
        }
        if e.rank() != self.s {
            return Err(Error::Precondition(format!("rank X̂ = {} but the theorem needs rank {}", e.rank(), self.s)));
        }
        Ok(x_hat)
    }

    /// `Y ∈ N_{C1}(X̄)`: off `I`, each entry of `Y` is zero, or negative
    /// where `X̄` vanishes.
    pub fn normal_cone_c1_contains(&self, xbar: &SymMatrix, y: &SymMatrix) -> Result<bool> {
        self.check_dim(y)?;
        if let Some(why) = self.c1_violation(xbar)? {
            return Err(Error::NotInSet(format!("X̄ is not in C1: {why}")));
        }
        let n = self.n_points();
        let ytol = entry_tol(y);
        let xtol = entry_tol(xbar);
        for i in 0..n {
            for j in i..n {
                if self.is_known(i, j) {
                    continue;
                }
                let v = y.get(i, j);
                if v.abs() > ytol && (v > 0.0 || xbar.get(i, j).abs() > xtol) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Y ∈ N_{C2}(X̄)`: `G(Y)` vanishes outside the upper-left block and the
    /// block lies in `N_{S_s}(X̂)`.
    pub fn normal_cone_c2_contains(&self, xbar: &SymMatrix, y: &SymMatrix) -> Result<bool> {
        self.check_dim(y)?;
        let n = self.n_points();
        let x_hat = self.g.x_hat(xbar)?;
        let gy = self.g.apply(y)?;
        let tol = PSD_TOL * (1.0 + gy.frobenius_norm());
        if (0..n).any(|i| gy.get(i, n - 1).abs() > tol) {
            return Ok(false);
        }
        match normal_cone_ss_contains(&x_hat, &gy.leading_block(n - 1), self.s) {
            Ok(r) => Ok(r.is_member),
            Err(Error::NotInSet(_)) => Err(Error::NotInSet(format!("X̄ is not in C2 (X̂ ∉ S_{})", self.s))),
            Err(e) => Err(e),
        }
    }
}

/// On-disk form of an EDM instance: known upper-triangle entries as
/// `[i, j, value]` triples, plus optional generator seed and ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdmInstance {
    pub n_points: usize,
    pub s: usize,
    #[serde(rename = "D")]
    pub d: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<Vec<f64>>>,
}

impl EdmInstance {
    pub fn partial(&self) -> Result<PartialEdm> {
        PartialEdm::new(self.n_points, self.s, &self.d)
    }

    /// Ground-truth EDM, when the instance carries points.
    pub fn ground_truth_edm(&self) -> Result<Option<SymMatrix>> {
        self.ground_truth.as_deref().map(build_edm).transpose()
    }
}

impl From<PartialEdm> for EdmInstance {
    fn from(p: PartialEdm) -> Self {
        let d = p.known.iter().map(|&(i, j)| (i, j, p.d.get(i, j))).collect();
        EdmInstance { n_points: p.n_points(), s: p.s, d, seed: None, ground_truth: None }
    }
}

impl TryFrom<EdmInstance> for PartialEdm {
    type Error = Error;
    fn try_from(f: EdmInstance) -> Result<Self> {
        f.partial()
    }
}

/// Random instance: `n_points` uniform in `[0,1]^s`, each off-diagonal
/// distance known independently with probability `known_fraction`.
pub fn generate_instance(n_points: usize, s: usize, known_fraction: f64, seed: u64) -> Result<EdmInstance> {
    if !(known_fraction > 0.0 && known_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("known fraction {known_fraction} not in (0, 1]")));
    }
    if n_points < s + 1 {
        return Err(Error::InvalidInput(format!("{n_points} points cannot span dimension s = {s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n_points).map(|_| (0..s).map(|_| rng.random::<f64>()).collect()).collect();
    let full = build_edm(&points)?;
    let mut d = Vec::new();
    for i in 0..n_points {
        for j in (i + 1)..n_points {
            if rng.random_bool(known_fraction) {
                d.push((i, j, full.get(i, j)));
            }
        }
    }
    Ok(EdmInstance { n_points, s, d, seed: Some(seed), ground_truth: Some(points) })
}

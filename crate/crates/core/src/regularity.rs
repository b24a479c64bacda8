//! Strong-regularity certificates for the feasibility pairs
//! `{Ax = b} ∩ K_s`, `{⟨A_j, X⟩ = b_j} ∩ S_s` and the EDM completion pair,
//! plus probes of prox-regularity for `K_s` and `S_s`.
//!
//! A pair `{C1, C2}` is strongly regular at `x̄` when
//! `N_{C1}(x̄) ∩ (−N_{C2}(x̄)) = {0}`; a witness is a nonzero element of that
//! intersection. Every witness returned here has been re-checked with the
//! membership tests of [`crate::sparsity`], [`crate::spectral`] and
//! [`crate::edm`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edm::PartialEdm;
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{eig_sym, intersect_coordinate_subspace, lp_cone_witness, norm2, svd, Matrix, Subspace, SymMatrix};
use crate::sparsity::{in_ks, normal_cone_ks_contains, proj_ks, SparseVecPoint};
use crate::spectral::{in_ss, normal_cone_ss_contains, proj_ss_detailed, psd_tol};
use crate::tol::rank_threshold;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Regular,
    NotRegular,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactCombinatorial,
    ExactLinear,
    Lp,
    FalsificationSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Witness {
    Vector(Vec<f64>),
    Matrix(SymMatrix),
}

impl Witness {
    pub fn norm(&self) -> f64 {
        match self {
            Witness::Vector(v) => norm2(v),
            Witness::Matrix(m) => m.frobenius_norm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub verdict: Verdict,
    pub method: Method,
    /// Nonzero `y` with `y ∈ N_{C1}` and `−y ∈ N_{C2}`; present iff not regular.
    pub witness: Option<Witness>,
    /// Dimension of the linear space the decision reduced to, when there is one.
    pub kernel_dim: Option<usize>,
    /// Seed of any randomized search that contributed to the verdict.
    pub seed: Option<u64>,
    pub details: String,
}

impl RegularityCertificate {
    fn new(verdict: Verdict, method: Method, details: impl Into<String>) -> Self {
        Self { verdict, method, witness: None, kernel_dim: None, seed: None, details: details.into() }
    }

    fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    fn with_kernel_dim(mut self, k: usize) -> Self {
        self.kernel_dim = Some(k);
        self
    }

    fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Limits for the combinatorial and randomized parts of the certifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// Largest `m` for which all coordinate subsets are enumerated.
    pub enumeration_max_dim: usize,
    /// Random starts (or sampled subsets) for falsification searches.
    pub starts: usize,
    /// Local steps per start.
    pub steps: usize,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self { enumeration_max_dim: 20, starts: 10_000, steps: 200, seed: 0 }
    }
}

fn check_s(m: usize, s: usize) -> Result<()> {
    if s > m {
        Err(Error::OutOfRange(format!("s = {s} exceeds dimension {m}")))
    } else {
        Ok(())
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm2(v);
    v.iter().map(|x| x / n).collect()
}

/// Accept `y` only if it lies in `V` and `−y ∈ N_{K_s}(x̄)`.
fn affine_ks_witness(v: &Subspace, xbar: &SparseVecPoint, s: usize, y: &[f64]) -> Result<Option<Vec<f64>>> {
    let n = norm2(y);
    if n < 1e-12 {
        return Ok(None);
    }
    let y = unit(y);
    if v.distance(&y) > 1e-8 {
        return Ok(None);
    }
    let neg: Vec<f64> = y.iter().map(|x| -x).collect();
    Ok(normal_cone_ks_contains(xbar, &neg, s)?.is_member.then_some(y))
}

/// Strong regularity of `{x : Ax = b}` and `K_s` at `x̄`, where
/// `N_{C1}(x̄) = range Aᵀ =: V`.
///
/// A witness is a nonzero `y ∈ V` with `x̄ ⊙ y = 0` and either `y ≥ 0`
/// (decided by one LP) or `supp y` inside some `T ⊆ Zᶜ`, `|T| = m − s`
/// (decided by a null-space computation per `T`). All `T` are enumerated
/// when `m ≤ cfg.enumeration_max_dim`; above that, `cfg.starts` subsets are
/// sampled and a failed search is reported as undecided.
pub fn strong_reg_affine_ks(
    a: &Matrix,
    xbar: &SparseVecPoint,
    s: usize,
    cfg: &CertifyConfig,
) -> Result<RegularityCertificate> {
    let m = xbar.dim();
    if a.cols() != m {
        return Err(dim_mismatch(format!("A has {} columns, x̄ has length {m}", a.cols())));
    }
    check_s(m, s)?;
    if !in_ks(xbar.x(), s) {
        return Err(Error::NotInSet(format!("x̄ is not in K_{s}")));
    }
    let v = Subspace::row_space(a)?;
    if v.dim() == 0 {
        return Ok(
            RegularityCertificate::new(Verdict::Regular, Method::ExactLinear, "range Aᵀ = {0}").with_kernel_dim(0)
        );
    }
    let z = xbar.support();
    if let Some(y) = lp_cone_witness(&v, z)? {
        if let Some(w) = affine_ks_witness(&v, xbar, s, &y)? {
            return Ok(RegularityCertificate::new(
                Verdict::NotRegular,
                Method::Lp,
                "range Aᵀ contains a nonzero y ≥ 0 vanishing on supp x̄",
            )
            .with_witness(Witness::Vector(w)));
        }
    }
    let free: Vec<usize> = (0..m).filter(|&j| xbar.is_zero_at(j)).collect();
    let k = m - s;
    if k == 0 {
        return Ok(RegularityCertificate::new(
            Verdict::Regular,
            Method::ExactCombinatorial,
            "no nonnegative witness and s = m leaves no sparse branch",
        ));
    }
    let check_subset = |t: &[usize]| -> Result<Option<Vec<f64>>> {
        for y in intersect_coordinate_subspace(&v, t)? {
            if let Some(w) = affine_ks_witness(&v, xbar, s, &y)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    };
    let total = binomial(free.len(), k);
    if m <= cfg.enumeration_max_dim || total == 1 {
        let mut comb: Vec<usize> = (0..k).collect();
        let mut count = 0u64;
        loop {
            count += 1;
            let t: Vec<usize> = comb.iter().map(|&c| free[c]).collect();
            if let Some(w) = check_subset(&t)? {
                return Ok(RegularityCertificate::new(
                    Verdict::NotRegular,
                    Method::ExactCombinatorial,
                    format!("range Aᵀ meets the coordinate subspace on {t:?}"),
                )
                .with_witness(Witness::Vector(w)));
            }
            if !next_combination(&mut comb, free.len()) {
                break;
            }
        }
        return Ok(RegularityCertificate::new(
            Verdict::Regular,
            Method::ExactCombinatorial,
            format!("no nonnegative witness; {count} coordinate subsets of size {k} checked"),
        ));
    }
    let found = (0..cfg.starts).into_par_iter().find_map_first(|i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let mut pool = free.clone();
        for p in 0..k {
            let q = rng.random_range(p..pool.len());
            pool.swap(p, q);
        }
        pool.truncate(k);
        pool.sort_unstable();
        match check_subset(&pool) {
            Ok(Some(w)) => Some(Ok((w, pool))),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    });
    match found.transpose()? {
        Some((w, t)) => Ok(RegularityCertificate::new(
            Verdict::NotRegular,
            Method::FalsificationSearch,
            format!("sampled coordinate subset {t:?} meets range Aᵀ"),
        )
        .with_witness(Witness::Vector(w))
        .with_seed(cfg.seed)),
        None => Ok(RegularityCertificate::new(
            Verdict::Undecided,
            Method::FalsificationSearch,
            format!(
                "m = {m} exceeds the enumeration limit {}; {} of {total} subsets sampled without a witness",
                cfg.enumeration_max_dim, cfg.starts
            ),
        )
        .with_seed(cfg.seed)),
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in (i + 1)..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Linear combination `Σ c_i W_i`.
fn combine(ws: &[SymMatrix], c: &[f64]) -> SymMatrix {
    let mut y = SymMatrix::zeros(ws[0].dim());
    for (w, ci) in ws.iter().zip(c) {
        y = y.lincomb(1.0, w, *ci);
    }
    y
}

/// Accept `Y` only if `−Y ∈ N_{S_s}(X̄)`.
fn span_ss_witness(xbar: &SymMatrix, s: usize, y: &SymMatrix) -> Result<Option<SymMatrix>> {
    let n = y.frobenius_norm();
    if n < 1e-12 {
        return Ok(None);
    }
    let y = y.scale(1.0 / n);
    Ok(normal_cone_ss_contains(xbar, &y.scale(-1.0), s)?.is_member.then_some(y))
}

/// Closest point to `c` among coefficient vectors with `Y(c)·K = 0`.
fn restrict_to_kernel(ws: &[SymMatrix], c: &[f64], kernel: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
    let m = ws[0].dim();
    let rows = m * kernel.len();
    let lin = Matrix::from_fn(rows, ws.len(), |r, col| {
        let (kv, i) = (&kernel[r / m], r % m);
        (0..m).map(|j| ws[col].get(i, j) * kv[j]).sum()
    });
    let null = svd(&lin)?.null_space();
    if null.is_empty() {
        return Ok(None);
    }
    let mut out = vec![0.0; c.len()];
    for nv in &null {
        let t: f64 = nv.iter().zip(c).map(|(a, b)| a * b).sum();
        for (o, x) in out.iter_mut().zip(nv) {
            *o += t * x;
        }
    }
    Ok((norm2(&out) > 1e-8).then_some(out))
}

fn coords(ws: &[SymMatrix], y: &SymMatrix) -> Vec<f64> {
    ws.iter().map(|w| w.inner(y)).collect()
}

/// Search one start for a nonzero `Y ∈ span W` with `Y ⪰ 0` or
/// `rank Y ≤ m − s`, by normalized alternating projections with periodic
/// exact restriction to the detected kernel.
fn search_start(
    ws: &[SymMatrix],
    xbar: &SymMatrix,
    s: usize,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Option<SymMatrix>> {
    let m = xbar.dim();
    let d = ws.len();
    let random_unit = |rng: &mut ChaCha8Rng| unit(&(0..d).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>());

    // PSD branch (either sign)
    let mut c = random_unit(rng);
    for step in 0..steps {
        let y = combine(ws, &c);
        let e = eig_sym(&y)?;
        let tol = psd_tol(&e);
        if e.lambda_min() >= -tol {
            if let Some(w) = span_ss_witness(xbar, s, &y)? {
                return Ok(Some(w));
            }
        }
        if e.lambda_max() <= tol {
            if let Some(w) = span_ss_witness(xbar, s, &y.scale(-1.0))? {
                return Ok(Some(w));
            }
        }
        if step % 25 == 24 || step + 1 == steps {
            let cut = 1e-6 * e.spectral_norm();
            let kernel: Vec<Vec<f64>> =
                (0..m).filter(|&k| e.lambda[k] <= cut).map(|k| e.eigenvector(k).to_vec()).collect();
            if !kernel.is_empty() {
                if let Some(cp) = restrict_to_kernel(ws, &c, &kernel)? {
                    if let Some(w) = span_ss_witness(xbar, s, &combine(ws, &cp))? {
                        return Ok(Some(w));
                    }
                }
            }
        }
        let plus: Vec<f64> = e.lambda.iter().map(|l| l.max(0.0)).collect();
        let next = coords(ws, &e.reconstruct_with(&plus));
        if norm2(&next) < 1e-12 {
            break;
        }
        c = unit(&next);
    }

    // low-rank branch: rank Y ≤ m − s
    let r = m - s;
    let mut c = random_unit(rng);
    for step in 0..steps {
        let y = combine(ws, &c);
        let e = eig_sym(&y)?;
        if e.rank() <= r {
            if let Some(w) = span_ss_witness(xbar, s, &y)? {
                return Ok(Some(w));
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| e.lambda[j].abs().total_cmp(&e.lambda[i].abs()).then(i.cmp(&j)));
        if step % 25 == 24 || step + 1 == steps {
            let kernel: Vec<Vec<f64>> = order[r..].iter().map(|&k| e.eigenvector(k).to_vec()).collect();
            if let Some(cp) = restrict_to_kernel(ws, &c, &kernel)? {
                if let Some(w) = span_ss_witness(xbar, s, &combine(ws, &cp))? {
                    return Ok(Some(w));
                }
            }
        }
        let mut trunc = vec![0.0; m];
        for &k in &order[..r] {
            trunc[k] = e.lambda[k];
        }
        let next = coords(ws, &e.reconstruct_with(&trunc));
        if norm2(&next) < 1e-12 {
            break;
        }
        c = unit(&next);
    }
    Ok(None)
}

/// Strong regularity of `{X : ⟨A_j, X⟩ = b_j}` and `S_s` at `X̄`, where
/// `N_{C1}(X̄) = span{A_j}`.
///
/// The subspace `W = {Y ∈ span{A_j} : X̄Y = 0}` is computed exactly. If it
/// is `{0}` the pair is regular; if it is a line, both signs of its
/// generator are tested directly. Otherwise a seeded falsification search
/// looks for a nonzero `Y ∈ W` with `Y ⪰ 0` or `rank Y ≤ m − s`; a failed
/// search yields `Undecided`, never `Regular`.
pub fn strong_reg_span_ss(
    a_list: &[SymMatrix],
    xbar: &SymMatrix,
    s: usize,
    cfg: &CertifyConfig,
) -> Result<RegularityCertificate> {
    let m = xbar.dim();
    if let Some(bad) = a_list.iter().position(|a| a.dim() != m) {
        return Err(dim_mismatch(format!("A_{bad} is {0}×{0}, X̄ is {m}×{m}", a_list[bad].dim())));
    }
    check_s(m, s)?;
    if !in_ss(xbar, s)? {
        return Err(Error::NotInSet(format!("X̄ is not in S_{s}")));
    }
    let vecs: Vec<Vec<f64>> = a_list.iter().map(|a| a.to_dense().as_slice().to_vec()).collect();
    let span = Subspace::span(m * m, &vecs)?;
    let basis: Vec<SymMatrix> = span
        .basis()
        .iter()
        .map(|b| SymMatrix::symmetrize(&Matrix::from_row_major(m, m, b.clone()).expect("m² entries")))
        .collect::<Result<_>>()?;
    if basis.is_empty() {
        return Ok(
            RegularityCertificate::new(Verdict::Regular, Method::ExactLinear, "span{A_j} = {0}").with_kernel_dim(0)
        );
    }
    let lin_cols: Vec<Matrix> = basis.iter().map(|b| xbar.mul(b)).collect();
    let lin = Matrix::from_fn(m * m, basis.len(), |r, c| lin_cols[c].as_slice()[r]);
    let null = svd(&lin)?.null_space();
    let ws: Vec<SymMatrix> = null.iter().map(|c| combine(&basis, c)).collect();
    let dim_w = ws.len();
    if dim_w == 0 {
        return Ok(RegularityCertificate::new(
            Verdict::Regular,
            Method::ExactLinear,
            "X̄Y ≠ 0 for every nonzero Y in span{A_j}",
        )
        .with_kernel_dim(0));
    }
    if dim_w == 1 {
        for y in [ws[0].clone(), ws[0].scale(-1.0)] {
            if let Some(w) = span_ss_witness(xbar, s, &y)? {
                return Ok(RegularityCertificate::new(
                    Verdict::NotRegular,
                    Method::ExactLinear,
                    "the one-dimensional space {Y ∈ span{A_j} : X̄Y = 0} contains a witness",
                )
                .with_witness(Witness::Matrix(w))
                .with_kernel_dim(1));
            }
        }
        return Ok(RegularityCertificate::new(
            Verdict::Regular,
            Method::ExactLinear,
            "the one-dimensional space {Y ∈ span{A_j} : X̄Y = 0} is spanned by an indefinite matrix of rank > m − s",
        )
        .with_kernel_dim(1));
    }
    let found = (0..cfg.starts).into_par_iter().find_map_first(|i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        search_start(&ws, xbar, s, cfg.steps, &mut rng).transpose()
    });
    let cert = match found.transpose()? {
        Some(w) => RegularityCertificate::new(
            Verdict::NotRegular,
            Method::FalsificationSearch,
            format!("witness found in a {dim_w}-dimensional search space"),
        )
        .with_witness(Witness::Matrix(w)),
        None => RegularityCertificate::new(
            Verdict::Undecided,
            Method::FalsificationSearch,
            format!(
                "no witness in {} starts × {} steps over a {dim_w}-dimensional space; regularity not established",
                cfg.starts, cfg.steps
            ),
        ),
    };
    Ok(cert.with_kernel_dim(dim_w).with_seed(cfg.seed))
}

/// Linear system deciding EDM strong regularity.
///
/// Unknowns are `Y_ij` for `(i, j) ∈ I`, `i ≤ j` (returned in order), with
/// `Y` zero elsewhere. Rows are the last column of `G(Y)` followed by the
/// entries of `X̂·Ĝ(Y)`, where `Ĝ(Y)` is the upper-left block of `G(Y)`.
pub fn edm_constraint_matrix(inst: &PartialEdm, x_hat: &SymMatrix) -> Result<(Matrix, Vec<(usize, usize)>)> {
    let n = inst.n_points();
    let mdim = n - 1;
    if x_hat.dim() != mdim {
        return Err(dim_mismatch(format!("X̂ is {0}×{0}, expected {mdim}×{mdim}", x_hat.dim())));
    }
    let unknowns: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).filter(|&(i, j)| inst.is_known(i, j)).collect();
    let rows = n + mdim * mdim;
    let mut lin = Matrix::zeros(rows, unknowns.len());
    let g = inst.householder();
    for (col, &(i, j)) in unknowns.iter().enumerate() {
        let mut e = SymMatrix::zeros(n);
        e.set(i, j, 1.0);
        let ge = g.apply(&e)?;
        for r in 0..n {
            lin[(r, col)] = ge.get(r, n - 1);
        }
        let prod = x_hat.mul(&ge.leading_block(mdim));
        for a in 0..mdim {
            for b in 0..mdim {
                lin[(n + a * mdim + b, col)] = prod[(a, b)];
            }
        }
    }
    Ok((lin, unknowns))
}

/// Strong regularity of the EDM completion pair `{C1, C2}` at `X̄`.
///
/// Checks the theorem's hypotheses (hollow, positive off-diagonal,
/// `X̄ ∈ C1 ∩ C2`, `rank X̂ = s`), then decides by the rank of
/// [`edm_constraint_matrix`]: regular iff its null space is trivial.
pub fn strong_reg_edm(inst: &PartialEdm, xbar: &SymMatrix) -> Result<RegularityCertificate> {
    let x_hat = inst.validate_solution(xbar)?;
    let (lin, unknowns) = edm_constraint_matrix(inst, &x_hat)?;
    let dec = svd(&lin)?;
    let rank = dec.rank();
    let nullity = unknowns.len() - rank;
    if nullity == 0 {
        return Ok(RegularityCertificate::new(
            Verdict::Regular,
            Method::ExactLinear,
            format!("constraint matrix has full column rank {rank}"),
        )
        .with_kernel_dim(0));
    }
    let null = dec.null_space();
    let n = inst.n_points();
    for c in &null {
        let mut y = SymMatrix::zeros(n);
        for (&(i, j), v) in unknowns.iter().zip(c) {
            y.set(i, j, *v);
        }
        let y = y.scale(1.0 / y.frobenius_norm());
        if inst.normal_cone_c1_contains(xbar, &y)? && inst.normal_cone_c2_contains(xbar, &y.scale(-1.0))? {
            return Ok(RegularityCertificate::new(
                Verdict::NotRegular,
                Method::ExactLinear,
                format!("constraint matrix has rank {rank} < {} unknowns", unknowns.len()),
            )
            .with_witness(Witness::Matrix(y))
            .with_kernel_dim(nullity));
        }
    }
    Ok(RegularityCertificate::new(
        Verdict::Undecided,
        Method::ExactLinear,
        format!("null space of dimension {nullity} found but no null vector passed the normal-cone re-check"),
    )
    .with_kernel_dim(nullity))
}

/// One point of the sequence showing a failure of prox-regularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequencePoint {
    pub k: u32,
    /// `x_k` itself (vector probe) or the spectrum of `X_k` (matrix probe).
    pub point: Vec<f64>,
    pub member_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxRegEvidence {
    pub prox_regular: bool,
    /// Radius of the ball of unique projections, when prox-regular.
    pub radius: Option<f64>,
    pub ball_samples: usize,
    pub singleton_samples: usize,
    pub sequence: Vec<SequencePoint>,
}

pub const PROBE_BALL_SAMPLES: usize = 100;
pub const PROBE_SEQUENCE: [u32; 3] = [10, 100, 1000];

fn check_probe_range(m: usize, s: usize) -> Result<()> {
    if m < 2 || s < 1 || s > m - 1 {
        Err(Error::OutOfRange(format!("prox-regularity probes need 1 ≤ s ≤ m − 1, got s = {s}, m = {m}")))
    } else {
        Ok(())
    }
}

/// `K_s` is prox-regular at `x̄` iff `‖x̄‖₀ = s`.
///
/// At maximal sparsity the projection is single-valued on the ball of
/// radius `½·min{x̄_j > 0}`, checked on random samples. Below it, the points
/// `x_k = x̄ + (μ/k)·1_T` with `T` a set of `s − ‖x̄‖₀ + 1` zero coordinates
/// have several projections; `μ = min(1, min{x̄_j > 0})` keeps the new
/// entries below the existing ones.
pub fn prox_reg_ks_probe(xbar: &SparseVecPoint, s: usize, seed: u64) -> Result<ProxRegEvidence> {
    let m = xbar.dim();
    check_probe_range(m, s)?;
    if !in_ks(xbar.x(), s) {
        return Err(Error::NotInSet(format!("x̄ is not in K_{s}")));
    }
    let min_pos = xbar.support().iter().map(|&j| xbar.x()[j]).fold(f64::INFINITY, f64::min);
    if xbar.l0() == s {
        let delta = 0.5 * min_pos;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut singleton = 0;
        for _ in 0..PROBE_BALL_SAMPLES {
            let dir = unit(&(0..m).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>());
            let r = delta * rng.random::<f64>().powf(1.0 / m as f64);
            let x: Vec<f64> = xbar.x().iter().zip(&dir).map(|(a, d)| a + r * d).collect();
            if proj_ks(&x, s)?.is_singleton() {
                singleton += 1;
            }
        }
        return Ok(ProxRegEvidence {
            prox_regular: true,
            radius: Some(delta),
            ball_samples: PROBE_BALL_SAMPLES,
            singleton_samples: singleton,
            sequence: Vec::new(),
        });
    }
    let mu = if min_pos.is_finite() { min_pos.min(1.0) } else { 1.0 };
    let zeros: Vec<usize> = (0..m).filter(|&j| xbar.is_zero_at(j)).collect();
    let t = &zeros[..s - xbar.l0() + 1];
    let mut sequence = Vec::new();
    for k in PROBE_SEQUENCE {
        let mut x = xbar.x().to_vec();
        for &j in t {
            x[j] += mu / k as f64;
        }
        let p = proj_ks(&x, s)?;
        sequence.push(SequencePoint { k, point: x, member_count: p.member_count });
    }
    Ok(ProxRegEvidence { prox_regular: false, radius: None, ball_samples: 0, singleton_samples: 0, sequence })
}

/// `S_s` is prox-regular at `X̄` iff `rank X̄ = s`; evidence lifts the vector
/// probe to the spectrum of `X̄`.
///
/// At rank `s`, perturbations of Frobenius norm below `½·λ_s(X̄)` keep a
/// strict gap `λ_s > λ_{s+1}` (Weyl), so the projection is unique. Below
/// rank `s`, raising `s − rank + 1` zero eigenvalues to `μ/k` creates a tie
/// at the cut; the distinct members obtained by dropping each tied
/// eigenvector in turn are counted after checking they are equidistant.
pub fn prox_reg_ss_probe(xbar: &SymMatrix, s: usize, seed: u64) -> Result<ProxRegEvidence> {
    let m = xbar.dim();
    check_probe_range(m, s)?;
    if !in_ss(xbar, s)? {
        return Err(Error::NotInSet(format!("X̄ is not in S_{s}")));
    }
    let e = eig_sym(xbar)?;
    let r = e.rank();
    if r == s {
        let delta = 0.5 * e.lambda[s - 1];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut singleton = 0;
        for _ in 0..PROBE_BALL_SAMPLES {
            let dir = SymMatrix::from_upper_fn(m, |_, _| rng.sample(StandardNormal));
            let dir = dir.scale(1.0 / dir.frobenius_norm());
            let rad = delta * rng.random::<f64>().powf(1.0 / (m * (m + 1) / 2) as f64);
            let x = xbar.lincomb(1.0, &dir, rad);
            let lam = eig_sym(&x)?.lambda;
            if !proj_ss_detailed(&x, s)?.boundary_tie && lam[s - 1] > lam[s] {
                singleton += 1;
            }
        }
        return Ok(ProxRegEvidence {
            prox_regular: true,
            radius: Some(delta),
            ball_samples: PROBE_BALL_SAMPLES,
            singleton_samples: singleton,
            sequence: Vec::new(),
        });
    }
    let mu = if r > 0 { e.lambda[r - 1].min(1.0) } else { 1.0 };
    let thr = rank_threshold(e.spectral_norm());
    let base: Vec<f64> = e.lambda.iter().map(|l| if l.abs() <= thr { 0.0 } else { *l }).collect();
    let tied: Vec<usize> = (r..=s).collect();
    let mut sequence = Vec::new();
    for k in PROBE_SEQUENCE {
        let mut lam = base.clone();
        for &j in &tied {
            lam[j] = mu / k as f64;
        }
        let xk = e.reconstruct_with(&lam);
        // members: keep the top r and all tied eigenvectors but one
        let members: Vec<SymMatrix> = tied
            .iter()
            .map(|&drop| {
                let d: Vec<f64> =
                    (0..m).map(|j| if j < r || (tied.contains(&j) && j != drop) { lam[j] } else { 0.0 }).collect();
                e.reconstruct_with(&d)
            })
            .collect();
        let dists: Vec<f64> = members.iter().map(|p| p.lincomb(1.0, &xk, -1.0).frobenius_norm()).collect();
        let equidistant = dists.iter().all(|d| (d - dists[0]).abs() <= 1e-12 * (1.0 + dists[0]));
        let mut distinct = 0u64;
        for (i, a) in members.iter().enumerate() {
            if members[..i].iter().all(|b| a.lincomb(1.0, b, -1.0).frobenius_norm() > 1e-9 * (1.0 + dists[0])) {
                distinct += 1;
            }
        }
        sequence.push(SequencePoint { k, point: lam, member_count: if equidistant { distinct } else { 1 } });
    }
    Ok(ProxRegEvidence { prox_regular: false, radius: None, ball_samples: 0, singleton_samples: 0, sequence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edm::build_edm;

    fn small_cfg() -> CertifyConfig {
        CertifyConfig { starts: 50, steps: 100, ..CertifyConfig::default() }
    }

    #[test]
    fn affine_ks_examples() {
        let cfg = CertifyConfig::default();
        let xbar = SparseVecPoint::new(vec![1.0, 0.0]);
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let c = strong_reg_affine_ks(&a, &xbar, 1, &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::Regular);
        assert!(c.witness.is_none());

        let a = Matrix::from_rows(&[vec![0.0, 1.0]]).unwrap();
        let c = strong_reg_affine_ks(&a, &xbar, 1, &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::NotRegular);
        let Some(Witness::Vector(y)) = c.witness else { panic!() };
        assert!((y[0]).abs() < 1e-12 && (y[1].abs() - 1.0).abs() < 1e-12);

        let a = Matrix::identity(3);
        let xbar = SparseVecPoint::new(vec![0.0, 2.0, 0.0]);
        let c = strong_reg_affine_ks(&a, &xbar, 2, &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::NotRegular);
        assert!(strong_reg_affine_ks(&Matrix::identity(2), &xbar, 1, &cfg).is_err());
    }

    #[test]
    fn affine_ks_sparse_branch_only() {
        // V = span{(1,-1,0)}: no nonnegative element, but it fits in T = {0,1}
        let a = Matrix::from_rows(&[vec![1.0, -1.0, 0.0]]).unwrap();
        let xbar = SparseVecPoint::new(vec![0.0, 0.0, 3.0]);
        let c = strong_reg_affine_ks(&a, &xbar, 1, &CertifyConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NotRegular);
        assert_eq!(c.method, Method::ExactCombinatorial);
        // with s = 2 the sparse branch needs ‖y‖₀ ≤ 1: regular
        let c = strong_reg_affine_ks(&a, &xbar, 2, &CertifyConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Regular);
    }

    #[test]
    fn affine_ks_large_dimension_is_sampled() {
        let m = 24;
        let mut rows = vec![vec![0.0; m]];
        rows[0][0] = 1.0;
        rows[0][1] = -1.0;
        rows[0][2] = 1.0;
        let a = Matrix::from_rows(&rows).unwrap();
        let mut x = vec![0.0; m];
        x[5] = 1.0;
        let xbar = SparseVecPoint::new(x);
        let cfg = CertifyConfig { starts: 200, ..CertifyConfig::default() };
        // regular (every nonzero y has mixed signs and three nonzeros > m − s),
        // but only sampling is available above the enumeration limit
        let c = strong_reg_affine_ks(&a, &xbar, 22, &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::Undecided);
        let c2 = strong_reg_affine_ks(&a, &xbar, 22, &cfg).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn span_ss_examples() {
        let xbar = SymMatrix::from_diag(&[1.0, 0.0]);
        let c = strong_reg_span_ss(&[SymMatrix::identity(2)], &xbar, 1, &small_cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::Regular);
        assert_eq!(c.method, Method::ExactLinear);

        let a1 = SymMatrix::from_diag(&[0.0, 1.0]);
        let c = strong_reg_span_ss(std::slice::from_ref(&a1), &xbar, 1, &small_cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::NotRegular);
        let Some(Witness::Matrix(y)) = &c.witness else { panic!() };
        assert!(y.lincomb(1.0, &a1, -1.0).max_abs() < 1e-12);

        let a2 = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = strong_reg_span_ss(&[a1.clone(), a2], &xbar, 1, &small_cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::NotRegular);
        assert_eq!(c.kernel_dim, Some(1));
    }

    #[test]
    fn span_ss_search_finds_psd_witness() {
        // X̄ = e1e1ᵀ in S^3, s = 1; W = matrices supported on the lower 2×2 block
        let xbar = SymMatrix::from_diag(&[1.0, 0.0, 0.0]);
        let a = [
            SymMatrix::from_diag(&[0.0, 1.0, -1.0]),
            SymMatrix::from_upper_fn(3, |i, j| if (i, j) == (1, 2) { 1.0 } else { 0.0 }),
            SymMatrix::from_diag(&[0.0, 1.0, 2.0]),
        ];
        let c = strong_reg_span_ss(&a, &xbar, 1, &small_cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::NotRegular);
        assert_eq!(c.kernel_dim, Some(3));
        let Some(Witness::Matrix(y)) = &c.witness else { panic!() };
        assert!(normal_cone_ss_contains(&xbar, &y.scale(-1.0), 1).unwrap().is_member);
        assert_eq!(c, strong_reg_span_ss(&a, &xbar, 1, &small_cfg()).unwrap());
    }

    #[test]
    fn span_ss_indefinite_full_rank_line_is_regular() {
        // W = span{diag(0, 1, -1)} in S^3 with s = 2: indefinite, rank 2 > m − s = 1
        let xbar = SymMatrix::from_diag(&[1.0, 0.0, 0.0]);
        let c = strong_reg_span_ss(&[SymMatrix::from_diag(&[0.0, 1.0, -1.0])], &xbar, 2, &small_cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::Regular);
    }

    #[test]
    fn edm_full_mask_is_not_regular() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 2.0]];
        let xbar = build_edm(&pts).unwrap();
        let all: Vec<(usize, usize)> = (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (i, j))).collect();
        let inst = PartialEdm::from_matrix(&xbar, 2, &all).unwrap();
        let c = strong_reg_edm(&inst, &xbar).unwrap();
        assert_eq!(c.verdict, Verdict::NotRegular);
        let Some(Witness::Matrix(y)) = &c.witness else { panic!() };
        assert!(y.frobenius_norm() > 1e-6);
        assert!(inst.normal_cone_c1_contains(&xbar, y).unwrap());
        assert!(inst.normal_cone_c2_contains(&xbar, &y.scale(-1.0)).unwrap());
        assert_eq!(c, strong_reg_edm(&inst, &xbar).unwrap());
    }

    #[test]
    fn edm_diagonal_mask() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 2.0]];
        let xbar = build_edm(&pts).unwrap();
        let inst = PartialEdm::from_matrix(&xbar, 2, &[]).unwrap();
        let c = strong_reg_edm(&inst, &xbar).unwrap();
        let (lin, unknowns) = edm_constraint_matrix(&inst, &inst.validate_solution(&xbar).unwrap()).unwrap();
        assert_eq!(unknowns.len(), 4);
        let expect = if svd(&lin).unwrap().rank() == 4 { Verdict::Regular } else { Verdict::NotRegular };
        assert_eq!(c.verdict, expect);
    }

    #[test]
    fn prox_reg_ks_examples() {
        let ev = prox_reg_ks_probe(&SparseVecPoint::new(vec![2.0, 0.0, 0.0]), 1, 0).unwrap();
        assert!(ev.prox_regular);
        assert_eq!(ev.radius, Some(1.0));
        assert_eq!(ev.singleton_samples, PROBE_BALL_SAMPLES);

        let ev = prox_reg_ks_probe(&SparseVecPoint::new(vec![2.0, 0.0, 0.0]), 2, 0).unwrap();
        assert!(!ev.prox_regular);
        assert_eq!(ev.sequence[0].k, 10);
        assert_eq!(ev.sequence[0].point, vec![2.0, 0.1, 0.1]);
        assert!(ev.sequence.iter().all(|p| p.member_count == 2));

        let ev = prox_reg_ks_probe(&SparseVecPoint::new(vec![0.0; 3]), 1, 0).unwrap();
        assert!(!ev.prox_regular);
        assert!(ev.sequence.iter().all(|p| p.member_count >= 2));
        assert!(prox_reg_ks_probe(&SparseVecPoint::new(vec![1.0, 0.0]), 2, 0).is_err());
        assert!(prox_reg_ks_probe(&SparseVecPoint::new(vec![1.0, 0.0]), 0, 0).is_err());
    }

    #[test]
    fn prox_reg_ss_examples() {
        let ev = prox_reg_ss_probe(&SymMatrix::from_diag(&[3.0, 0.0]), 1, 0).unwrap();
        assert!(ev.prox_regular);
        assert_eq!(ev.singleton_samples, PROBE_BALL_SAMPLES);
        assert!(prox_reg_ss_probe(&SymMatrix::from_diag(&[3.0, 2.0]), 2, 0).is_err());
        let ev = prox_reg_ss_probe(&SymMatrix::zeros(2), 1, 0).unwrap();
        assert!(!ev.prox_regular);
        assert!(ev.sequence.iter().all(|p| p.member_count >= 2));
        let ev = prox_reg_ss_probe(&SymMatrix::from_diag(&[2.0, 0.0, 0.0, 0.0]), 3, 0).unwrap();
        assert!(ev.sequence.iter().all(|p| p.member_count == 3));
    }
}

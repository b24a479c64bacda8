//! Spectral sets of symmetric matrices: `S_s` (PSD, rank ≤ s), `R_s`
//! (rank ≤ s), the PSD and NSD cones. Projections act on the eigenvalues of
//! the canonical [`eig_sym`] decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{eig_sym, EigenDecomp, SymMatrix};
use crate::tol::{rank_threshold, PSD_TOL};

/// One of the spectral sets handled here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "s", rename_all = "kebab-case")]
pub enum SpectralSet {
    /// `S_s`
    LowRankPsd(usize),
    /// `R_s`
    LowRank(usize),
    Psd,
    Nsd,
}

impl SpectralSet {
    fn check(&self, m: usize) -> Result<()> {
        match *self {
            SpectralSet::LowRankPsd(s) | SpectralSet::LowRank(s) => check_s(m, s),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: &SymMatrix) -> Result<bool> {
        self.check(x.dim())?;
        let e = eig_sym(x)?;
        let tol = psd_tol(&e);
        Ok(match *self {
            SpectralSet::LowRankPsd(s) => e.lambda_min() >= -tol && e.rank() <= s,
            SpectralSet::LowRank(s) => e.rank() <= s,
            SpectralSet::Psd => e.lambda_min() >= -tol,
            SpectralSet::Nsd => e.lambda_max() <= tol,
        })
    }

    pub fn project(&self, x: &SymMatrix) -> Result<SpectralProjection> {
        self.check(x.dim())?;
        match *self {
            SpectralSet::LowRankPsd(s) => proj_ss_detailed(x, s),
            SpectralSet::LowRank(s) => proj_rs_detailed(x, s),
            SpectralSet::Psd => proj_ss_detailed(x, x.dim()),
            SpectralSet::Nsd => {
                let p = proj_ss_detailed(&x.scale(-1.0), x.dim())?;
                Ok(SpectralProjection { matrix: p.matrix.scale(-1.0), boundary_tie: false })
            }
        }
    }
}

/// Canonical projection plus a flag for eigenvalue ties at the cut.
///
/// When `boundary_tie` is set the projection is not unique: any basis of the
/// tied eigenspace gives another member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProjection {
    pub matrix: SymMatrix,
    pub boundary_tie: bool,
}

fn check_s(m: usize, s: usize) -> Result<()> {
    if s > m {
        Err(Error::OutOfRange(format!("rank bound s = {s} exceeds dimension {m}")))
    } else {
        Ok(())
    }
}

/// PSD tolerance `PSD_TOL·(1 + ‖X‖₂)`.
pub fn psd_tol(e: &EigenDecomp) -> f64 {
    PSD_TOL * (1.0 + e.spectral_norm())
}

pub fn is_psd(x: &SymMatrix) -> Result<bool> {
    SpectralSet::Psd.contains(x)
}

pub fn in_ss(x: &SymMatrix, s: usize) -> Result<bool> {
    SpectralSet::LowRankPsd(s).contains(x)
}

/// `P_{S_s}(X) = Uᵀ·diag(λ⁺_1,…,λ⁺_s,0,…,0)·U`.
pub fn proj_ss(x: &SymMatrix, s: usize) -> Result<SymMatrix> {
    Ok(proj_ss_detailed(x, s)?.matrix)
}

pub fn proj_ss_detailed(x: &SymMatrix, s: usize) -> Result<SpectralProjection> {
    check_s(x.dim(), s)?;
    let e = eig_sym(x)?;
    Ok(proj_ss_from_eig(&e, s))
}

/// `P_{S_s}` from a precomputed decomposition.
pub fn proj_ss_from_eig(e: &EigenDecomp, s: usize) -> SpectralProjection {
    let m = e.dim();
    let d: Vec<f64> = (0..m).map(|k| if k < s { e.lambda[k].max(0.0) } else { 0.0 }).collect();
    let thr = rank_threshold(e.spectral_norm());
    let boundary_tie = s >= 1 && s < m && d[s - 1] > thr && (d[s - 1] - e.lambda[s].max(0.0)).abs() <= thr;
    SpectralProjection { matrix: e.reconstruct_with(&d), boundary_tie }
}

/// `P_{S^m_+}(X) = Uᵀ·diag(λ⁺)·U`.
pub fn proj_psd(x: &SymMatrix) -> Result<SymMatrix> {
    proj_ss(x, x.dim())
}

/// `P_{R_s}(X)`: keep the `s` eigenvalues of largest magnitude.
pub fn proj_rs(x: &SymMatrix, s: usize) -> Result<SymMatrix> {
    Ok(proj_rs_detailed(x, s)?.matrix)
}

pub fn proj_rs_detailed(x: &SymMatrix, s: usize) -> Result<SpectralProjection> {
    check_s(x.dim(), s)?;
    let e = eig_sym(x)?;
    let m = e.dim();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| e.lambda[j].abs().total_cmp(&e.lambda[i].abs()).then(i.cmp(&j)));
    let mut d = vec![0.0; m];
    for &k in &order[..s] {
        d[k] = e.lambda[k];
    }
    let thr = rank_threshold(e.spectral_norm());
    let boundary_tie = s >= 1
        && s < m
        && e.lambda[order[s - 1]].abs() > thr
        && (e.lambda[order[s - 1]].abs() - e.lambda[order[s]].abs()).abs() <= thr;
    Ok(SpectralProjection { matrix: e.reconstruct_with(&d), boundary_tie })
}

/// `‖X̄Y‖_F` and whether it passes `‖X̄Y‖_F ≤ PSD_TOL·(1 + ‖X̄‖_F‖Y‖_F)`.
pub fn product_residual(xbar: &SymMatrix, y: &SymMatrix) -> (f64, bool) {
    let r = xbar.mul(y).frobenius_norm();
    (r, r <= PSD_TOL * (1.0 + xbar.frobenius_norm() * y.frobenius_norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixConeBranch {
    /// `X̄Y = 0, Y ⪯ 0`
    NsdBranch,
    /// `X̄Y = 0, rank Y ≤ m − s`
    LowRankBranch,
    Both,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConeReport {
    pub is_member: bool,
    pub branch: MatrixConeBranch,
    /// `‖X̄Y‖_F`
    pub product_residual: f64,
    pub y_lambda_max: f64,
    pub y_lambda_min: f64,
    pub y_rank: usize,
}

fn require_in_ss(xbar: &SymMatrix, y: &SymMatrix, s: usize) -> Result<EigenDecomp> {
    if xbar.dim() != y.dim() {
        return Err(dim_mismatch(format!("X̄ is {0}×{0}, Y is {1}×{1}", xbar.dim(), y.dim())));
    }
    check_s(xbar.dim(), s)?;
    let e = eig_sym(xbar)?;
    if e.lambda_min() < -psd_tol(&e) || e.rank() > s {
        return Err(Error::NotInSet(format!("X̄ is not in S_{s}")));
    }
    Ok(e)
}

/// Mordukhovich normal cone membership `Y ∈ N_{S_s}(X̄)`.
pub fn normal_cone_ss_contains(xbar: &SymMatrix, y: &SymMatrix, s: usize) -> Result<MatrixConeReport> {
    require_in_ss(xbar, y, s)?;
    let m = xbar.dim();
    let (residual, vanishes) = product_residual(xbar, y);
    let ey = eig_sym(y)?;
    let nsd = ey.lambda_max() <= psd_tol(&ey);
    let low_rank = ey.rank() <= m - s;
    let branch = match (vanishes, nsd, low_rank) {
        (false, _, _) | (true, false, false) => MatrixConeBranch::None,
        (true, true, true) => MatrixConeBranch::Both,
        (true, true, false) => MatrixConeBranch::NsdBranch,
        (true, false, true) => MatrixConeBranch::LowRankBranch,
    };
    Ok(MatrixConeReport {
        is_member: branch != MatrixConeBranch::None,
        branch,
        product_residual: residual,
        y_lambda_max: ey.lambda_max(),
        y_lambda_min: ey.lambda_min(),
        y_rank: ey.rank(),
    })
}

/// `Y ∈ N_{R_s}(X̄) = {Y : X̄Y = 0}`, stated only for `rank X̄ = s`.
pub fn normal_cone_rs_contains(xbar: &SymMatrix, y: &SymMatrix, s: usize) -> Result<bool> {
    if xbar.dim() != y.dim() {
        return Err(dim_mismatch(format!("X̄ is {0}×{0}, Y is {1}×{1}", xbar.dim(), y.dim())));
    }
    check_s(xbar.dim(), s)?;
    let r = eig_sym(xbar)?.rank();
    if r != s {
        return Err(Error::Precondition(format!("rank X̄ = {r}, the normal cone to R_{s} needs rank {s}")));
    }
    Ok(product_residual(xbar, y).1)
}

/// Proximal normal cone membership `Y ∈ N^prox_{S_s}(X̄)`: the PSD normal
/// cone below maximal rank, `{Y : X̄Y = 0}` at rank `s`.
pub fn prox_normal_cone_ss_contains(xbar: &SymMatrix, y: &SymMatrix, s: usize) -> Result<bool> {
    let e = require_in_ss(xbar, y, s)?;
    if !product_residual(xbar, y).1 {
        return Ok(false);
    }
    if e.rank() == s {
        return Ok(true);
    }
    let ey = eig_sym(y)?;
    Ok(ey.lambda_max() <= psd_tol(&ey))
}

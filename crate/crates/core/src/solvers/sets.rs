use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::edm::PartialEdm;
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{norm2, svd, Matrix, SymMatrix};
use crate::sparsity::{proj_ks, proj_nonneg};
use crate::spectral::{proj_psd, proj_rs, proj_ss};
use crate::tol::rank_threshold;

/// A point of a Euclidean space the solvers iterate in.
pub trait Point: Clone + Send + Sync {
    /// `a·self + b·other`
    fn axpby(&self, a: f64, other: &Self, b: f64) -> Self;
    fn norm(&self) -> f64;

    fn dist(&self, other: &Self) -> f64 {
        self.axpby(1.0, other, -1.0).norm()
    }
}

impl Point for Vec<f64> {
    fn axpby(&self, a: f64, other: &Self, b: f64) -> Self {
        self.iter().zip(other).map(|(x, y)| a * x + b * y).collect()
    }

    fn norm(&self) -> f64 {
        norm2(self)
    }
}

impl Point for SymMatrix {
    fn axpby(&self, a: f64, other: &Self, b: f64) -> Self {
        self.scale(a).lincomb(1.0, other, b)
    }

    fn norm(&self) -> f64 {
        self.frobenius_norm()
    }
}

/// A closed set with a single-valued (canonical) projection.
pub trait ConstraintSet<P: Point>: Send + Sync {
    fn project(&self, x: &P) -> Result<P>;
    fn label(&self) -> String;
}

/// `{x : Ax = b}` with the projection `x − A⁺(Ax − b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineSpec", into = "AffineSpec")]
pub struct AffineSet {
    a: Matrix,
    b: Vec<f64>,
    pinv: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AffineSpec {
    a: Matrix,
    b: Vec<f64>,
}

impl TryFrom<AffineSpec> for AffineSet {
    type Error = Error;
    fn try_from(s: AffineSpec) -> Result<Self> {
        AffineSet::new(s.a, s.b)
    }
}

impl From<AffineSet> for AffineSpec {
    fn from(s: AffineSet) -> Self {
        AffineSpec { a: s.a, b: s.b }
    }
}

impl AffineSet {
    /// Fails if `Ax = b` has no solution.
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(dim_mismatch(format!("A has {} rows, b has length {}", a.rows(), b.len())));
        }
        let dec = svd(&a)?;
        let thr = rank_threshold(dec.sigma_max());
        let (p, m) = (a.rows(), a.cols());
        let mut pinv = Matrix::zeros(m, p);
        for (k, &sig) in dec.sigma.iter().enumerate() {
            if sig > thr {
                for i in 0..m {
                    for j in 0..p {
                        pinv[(i, j)] += dec.v[(i, k)] * dec.u[(j, k)] / sig;
                    }
                }
            }
        }
        let set = Self { a, b, pinv };
        let x = set.pinv.matvec(&set.b)?;
        let resid = norm2(&crate::linalg::sub(&set.a.matvec(&x)?, &set.b));
        if resid > 1e-9 * (1.0 + norm2(&set.b)) {
            return Err(Error::InvalidInput(format!("Ax = b is inconsistent (least-squares residual {resid:e})")));
        }
        Ok(set)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `‖Ax − b‖`.
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        Ok(norm2(&crate::linalg::sub(&self.a.matvec(x)?, &self.b)))
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = crate::linalg::sub(&self.a.matvec(x)?, &self.b);
        let c = self.pinv.matvec(&r)?;
        Ok(x.iter().zip(&c).map(|(a, b)| a - b).collect())
    }
}

/// Vector constraint sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VectorSet {
    Whole,
    Nonneg,
    Ks {
        s: usize,
    },
    Affine(AffineSet),
    /// `{x : ⟨normal, x⟩ ≤ offset}`
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// Fixed values where `known` is set, nonnegative elsewhere.
    MaskNonneg {
        known: Vec<Option<f64>>,
    },
}

impl ConstraintSet<Vec<f64>> for VectorSet {
    fn project(&self, x: &Vec<f64>) -> Result<Vec<f64>> {
        match self {
            VectorSet::Whole => Ok(x.clone()),
            VectorSet::Nonneg => Ok(proj_nonneg(x)),
            VectorSet::Ks { s } => Ok(proj_ks(x, *s)?.canonical),
            VectorSet::Affine(a) => a.project(x),
            VectorSet::HalfSpace { normal, offset } => {
                if normal.len() != x.len() {
                    return Err(dim_mismatch(format!("half-space in R^{}, point in R^{}", normal.len(), x.len())));
                }
                let nn: f64 = normal.iter().map(|v| v * v).sum();
                if nn == 0.0 {
                    return Err(Error::InvalidInput("half-space normal is zero".into()));
                }
                let excess = normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - offset;
                if excess <= 0.0 {
                    Ok(x.clone())
                } else {
                    Ok(x.iter().zip(normal).map(|(xi, ni)| xi - excess / nn * ni).collect())
                }
            }
            VectorSet::MaskNonneg { known } => {
                if known.len() != x.len() {
                    return Err(dim_mismatch(format!("mask of length {}, point of length {}", known.len(), x.len())));
                }
                Ok(known.iter().zip(x).map(|(k, xi)| k.unwrap_or(xi.max(0.0))).collect())
            }
        }
    }

    fn label(&self) -> String {
        match self {
            VectorSet::Whole => "R^m".into(),
            VectorSet::Nonneg => "R^m_+".into(),
            VectorSet::Ks { s } => format!("K_{s}"),
            VectorSet::Affine(a) => format!("affine ({} equations)", a.a.rows()),
            VectorSet::HalfSpace { .. } => "half-space".into(),
            VectorSet::MaskNonneg { .. } => "mask-nonneg".into(),
        }
    }
}

/// `{X : ⟨A_j, X⟩ = b_j}` in `S^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixAffineSpec", into = "MatrixAffineSpec")]
pub struct MatrixAffineSet {
    a_list: Vec<SymMatrix>,
    flat: AffineSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MatrixAffineSpec {
    a: Vec<SymMatrix>,
    b: Vec<f64>,
}

impl TryFrom<MatrixAffineSpec> for MatrixAffineSet {
    type Error = Error;
    fn try_from(s: MatrixAffineSpec) -> Result<Self> {
        MatrixAffineSet::new(s.a, s.b)
    }
}

impl From<MatrixAffineSet> for MatrixAffineSpec {
    fn from(s: MatrixAffineSet) -> Self {
        MatrixAffineSpec { a: s.a_list, b: s.flat.b }
    }
}

impl MatrixAffineSet {
    pub fn new(a_list: Vec<SymMatrix>, b: Vec<f64>) -> Result<Self> {
        let Some(first) = a_list.first() else {
            return Err(Error::InvalidInput("no constraint matrices".into()));
        };
        let m = first.dim();
        if let Some(bad) = a_list.iter().position(|a| a.dim() != m) {
            return Err(dim_mismatch(format!("A_{bad} has dimension {}, expected {m}", a_list[bad].dim())));
        }
        let rows: Vec<Vec<f64>> = a_list.iter().map(|a| a.to_dense().as_slice().to_vec()).collect();
        let flat = AffineSet::new(Matrix::from_rows(&rows)?, b)?;
        Ok(Self { a_list, flat })
    }

    pub fn matrices(&self) -> &[SymMatrix] {
        &self.a_list
    }

    pub fn b(&self) -> &[f64] {
        self.flat.b()
    }

    pub fn project(&self, x: &SymMatrix) -> Result<SymMatrix> {
        let m = self.a_list[0].dim();
        if x.dim() != m {
            return Err(dim_mismatch(format!("constraints on S^{m}, point in S^{}", x.dim())));
        }
        let p = self.flat.project(x.to_dense().as_slice())?;
        SymMatrix::symmetrize(&Matrix::from_row_major(m, m, p)?)
    }
}

/// Matrix constraint sets.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSet {
    Ss(usize),
    Rs(usize),
    Psd,
    Affine(MatrixAffineSet),
    EdmC1(Arc<PartialEdm>),
    EdmC2(Arc<PartialEdm>),
}

impl ConstraintSet<SymMatrix> for MatrixSet {
    fn project(&self, x: &SymMatrix) -> Result<SymMatrix> {
        match self {
            MatrixSet::Ss(s) => proj_ss(x, *s),
            MatrixSet::Rs(s) => proj_rs(x, *s),
            MatrixSet::Psd => proj_psd(x),
            MatrixSet::Affine(a) => a.project(x),
            MatrixSet::EdmC1(inst) => inst.proj_c1(x),
            MatrixSet::EdmC2(inst) => inst.proj_c2(x),
        }
    }

    fn label(&self) -> String {
        match self {
            MatrixSet::Ss(s) => format!("S_{s}"),
            MatrixSet::Rs(s) => format!("R_{s}"),
            MatrixSet::Psd => "S^m_+".into(),
            MatrixSet::Affine(a) => format!("affine ({} equations)", a.a_list.len()),
            MatrixSet::EdmC1(_) => "EDM C1".into(),
            MatrixSet::EdmC2(inst) => format!("EDM C2 (s = {})", inst.s()),
        }
    }
}

/// `R_C(x) = 2·P_C(x) − x`.
pub fn reflect<P: Point, C: ConstraintSet<P> + ?Sized>(c: &C, x: &P) -> Result<P> {
    Ok(c.project(x)?.axpby(2.0, x, -1.0))
}

/// One Douglas–Rachford step `x ↦ (x + R_{C2}(R_{C1}(x)))/2`.
pub fn dr_step<P: Point, C1, C2>(c1: &C1, c2: &C2, x: &P) -> Result<P>
where
    C1: ConstraintSet<P> + ?Sized,
    C2: ConstraintSet<P> + ?Sized,
{
    let r = reflect(c2, &reflect(c1, x)?)?;
    Ok(x.axpby(0.5, &r, 0.5))
}

//! File formats read and written by the CLI. Everything is JSON except
//! solver traces, which are CSV.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use sparsecone::regularity::{RegularityCertificate, Verdict};
use sparsecone::solvers::{SolveStatus, TraceSummary};
use sparsecone::{EdmInstance, Matrix, SolveTrace, SymMatrix};

use crate::Failure;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::internal(format!("serializing output: {e}")))?;
    fs::write(path, text + "\n").map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn write_trace(path: &Path, trace: &SolveTrace) -> Result<(), Failure> {
    let file = fs::File::create(path).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    trace.write_csv(file).map_err(Failure::from)
}

/// A vector or a symmetric matrix, written as a JSON array or an array of
/// rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Vector(Vec<f64>),
    Matrix(SymMatrix),
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::Vector(v) => v.serialize(s),
            Point::Matrix(m) => m.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(d)?;
        let is_matrix = value.as_array().and_then(|a| a.first()).is_some_and(|v| v.is_array());
        if is_matrix {
            serde_json::from_value(value).map(Point::Matrix).map_err(D::Error::custom)
        } else {
            serde_json::from_value(value).map(Point::Vector).map_err(D::Error::custom)
        }
    }
}

/// Written by `project`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectOutput {
    pub set: String,
    pub s: Option<usize>,
    /// First member in the canonical order.
    pub canonical: Point,
    /// All distinct members, when the projection is a finite set that was
    /// enumerated in full.
    pub members: Option<Vec<Vec<f64>>>,
    /// Number of distinct members; `None` when there are infinitely many.
    pub member_count: Option<u64>,
    pub truncated: bool,
    /// Eigenvalue tie at the rank cut: the matrix projection is not unique.
    pub boundary_tie: bool,
    pub distance: f64,
}

/// Written by `cone-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeOutput {
    pub set: String,
    pub s: usize,
    /// Membership in the limiting (Mordukhovich) normal cone.
    pub limiting: bool,
    /// Membership in the proximal normal cone, where implemented.
    pub proximal: Option<bool>,
    /// Which part of the cone's union contains `y`.
    pub branch: Option<String>,
    pub detail: Option<String>,
}

/// Input of `certify --mode affine-ks`: `C1 = {x : Ax = b}`, `C2 = K_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineKsInstance {
    pub a: Matrix,
    pub xbar: Vec<f64>,
    pub s: usize,
}

/// Input of `certify --mode span-ss`: `C1 = {X : ⟨A_j, X⟩ = b_j}`, `C2 = S_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanSsInstance {
    pub a: Vec<SymMatrix>,
    pub xbar: SymMatrix,
    pub s: usize,
}

/// Input of `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Problem {
    /// `Ax = b` with `x ∈ K_s`.
    SparseLinear {
        a: Matrix,
        b: Vec<f64>,
        s: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_true: Option<Vec<f64>>,
    },
    /// `⟨A_j, X⟩ = b_j` with `X ∈ S_s`.
    LowRankPsd {
        a: Vec<SymMatrix>,
        b: Vec<f64>,
        s: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_true: Option<SymMatrix>,
    },
    /// EDM completion.
    Edm(EdmInstance),
}

/// Written by `solve` and `edm-complete`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub summary: TraceSummary,
    /// Point of `C2` closest to the final shadow. For EDM completion this is
    /// the EDM rebuilt from `points`.
    pub solution: Point,
    /// `P_{C1}` of the final iterate.
    pub shadow: Point,
    /// `‖Ax − b‖` of `solution` for affine problems, the largest deviation
    /// from a known distance for EDM completion.
    pub constraint_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateRef>,
}

/// Regularity verdict attached to an EDM completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRef {
    /// `ground-truth` or `completion`: the matrix the certificate is about.
    pub at: String,
    pub certificate: Option<RegularityCertificate>,
    /// Why no certificate could be issued (a failed precondition).
    pub error: Option<String>,
}

/// One row of `bench` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_points: usize,
    pub seed: u64,
    /// Regularity at the planted configuration, if it could be decided.
    pub verdict: Option<Verdict>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_residual: f64,
    pub rho: Option<f64>,
    pub r2: Option<f64>,
    pub elapsed_ms: f64,
}

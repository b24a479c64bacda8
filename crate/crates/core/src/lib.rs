//! Projections, normal cones and regularity tests for sparse and low-rank
//! sets, with projection-based feasibility solvers and Euclidean distance
//! matrix completion.
//!
//! The sets are
//! - `K_s = {x ∈ R^m : x ≥ 0, ‖x‖₀ ≤ s}` and `A_s = {x : ‖x‖₀ ≤ s}` ([`sparsity`]),
//! - `S_s = {X ⪰ 0 : rank X ≤ s}` and `R_s = {X : rank X ≤ s}` ([`spectral`]),
//!
//! and the EDM completion sets `C1`, `C2` ([`edm`]).
//!
//! ```
//! use sparsecone::sparsity::proj_ks;
//!
//! let p = proj_ks(&[3.0, -1.0, 2.0, 5.0], 2).unwrap();
//! assert_eq!(p.canonical, vec![3.0, 0.0, 0.0, 5.0]);
//! ```

pub mod edm;
pub mod error;
pub mod linalg;
pub mod regularity;
pub mod solvers;
pub mod sparsity;
pub mod spectral;
pub mod tol;

pub use edm::{EdmInstance, HouseholderG, PartialEdm};
pub use error::{Error, Result};
pub use linalg::{EigenDecomp, Matrix, Subspace, SymMatrix};
pub use regularity::{CertifyConfig, RegularityCertificate, Verdict, Witness};
pub use solvers::{ConstraintSet, MatrixSet, SolveStatus, SolveTrace, SolverConfig, VectorSet};
pub use sparsity::{ProjectionResult, SparseVecPoint};
pub use spectral::{MatrixConeReport, SpectralSet};

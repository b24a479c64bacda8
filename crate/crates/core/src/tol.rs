//! Global numerical tolerances.
//!
//! One relative constant (default `1e-10`) drives every support, rank and
//! zero decision in the crate. It can be overridden at runtime, e.g. by the
//! CLI from an environment variable, and is read atomically so concurrent
//! callers always see a consistent value.

use std::sync::atomic::{AtomicU64, Ordering};

/// Default relative zero/rank tolerance.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Tolerance used for PSD membership (`λ_min ≥ −PSD_TOL·(1+‖X‖)`) and for
/// the `X̄Y = 0` product test.
pub const PSD_TOL: f64 = 1e-9;

/// Environment variable read by the CLI to override [`zero_tol`].
pub const ZERO_TOL_ENV: &str = "SPARSECONE_ZERO_TOL";

static ZERO_TOL_BITS: AtomicU64 = AtomicU64::new(0x3DDB_7CDF_D9D7_BDBB); // 1e-10

/// Current global zero tolerance.
pub fn zero_tol() -> f64 {
    f64::from_bits(ZERO_TOL_BITS.load(Ordering::Relaxed))
}

/// Override the global zero tolerance. Returns the previous value.
///
/// Panics if `tol` is not finite and positive.
pub fn set_zero_tol(tol: f64) -> f64 {
    assert!(tol.is_finite() && tol > 0.0, "zero tolerance must be positive");
    f64::from_bits(ZERO_TOL_BITS.swap(tol.to_bits(), Ordering::Relaxed))
}

/// Infinity norm of a slice (0 for an empty slice).
pub fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Threshold below which an entry of `x` counts as zero:
/// `zero_tol · (1 + ‖x‖_∞)`.
pub fn vector_zero_threshold(x: &[f64]) -> f64 {
    zero_tol() * (1.0 + inf_norm(x))
}

/// Threshold below which a singular/eigen value counts as zero for a matrix
/// whose largest singular value is `scale`: `zero_tol · max(1, scale)`.
pub fn rank_threshold(scale: f64) -> f64 {
    zero_tol() * scale.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bits_are_one_e_minus_ten() {
        assert_eq!(f64::from_bits(0x3DDB_7CDF_D9D7_BDBB), DEFAULT_ZERO_TOL);
    }

    #[test]
    fn thresholds_scale_with_magnitude() {
        let t = vector_zero_threshold(&[0.0, -3.0]);
        assert!((t - 4.0 * zero_tol()).abs() < 1e-25);
        assert_eq!(rank_threshold(0.5), zero_tol());
        assert_eq!(inf_norm(&[]), 0.0);
    }
}

//! Douglas–Rachford and alternating projections for two-set feasibility
//! problems `find x ∈ C1 ∩ C2`.
//!
//! Both methods use canonical projections, so runs are deterministic. The
//! stopping residual is the shadow infeasibility `‖P_{C1}x − P_{C2}P_{C1}x‖`.

mod planted;
mod sets;
mod trace;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use planted::{planted_sparse, PlantedSparse};
pub use sets::{dr_step, reflect, AffineSet, ConstraintSet, MatrixAffineSet, MatrixSet, Point, VectorSet};
pub use trace::{
    estimate_rate, estimate_rate_from, RateEstimate, SolveStatus, SolveTrace, SolverMethod, TraceRecord, TraceSummary,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once the shadow residual is at or below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Declare a stall when neither the peak shadow residual nor the peak
    /// step norm over the last `stall_window` iterations is below `0.999×`
    /// its peak over the window before.
    pub stall_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100_000, stall_window: 200 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if self.stall_window == 0 {
            return Err(Error::InvalidConfig("stall_window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of a solver run.
#[derive(Debug, Clone)]
pub struct SolveOutcome<P> {
    /// `P_{C1}(x)` at the last iterate.
    pub shadow: P,
    /// `P_{C2}(shadow)`: lies exactly in `C2`, within the residual of `C1`.
    pub partner: P,
    /// The last governing iterate `x`.
    pub last_iterate: P,
    pub trace: SolveTrace,
}

const STALL_FACTOR: f64 = 0.999;

// Peaks rather than minima: under DR the shadow residual oscillates as the
// iterates turn around the fixed-point set, and a single deep trough would
// otherwise look like a stall for every later window. When the oscillation
// is slower than the window the step norm still shows the progress.
fn decreasing(r: &[f64], window: usize) -> bool {
    let n = r.len();
    if n < 2 * window {
        return true;
    }
    let peak = |r: &[f64]| r.iter().copied().fold(0.0, f64::max);
    peak(&r[n - window..]) < STALL_FACTOR * peak(&r[n - 2 * window..n - window])
}

fn stalled(res: &[f64], steps: &[f64], window: usize) -> bool {
    !decreasing(res, window) && !decreasing(steps, window)
}

fn run<P, C1, C2>(method: SolverMethod, c1: &C1, c2: &C2, x0: &P, cfg: &SolverConfig) -> Result<SolveOutcome<P>>
where
    P: Point,
    C1: ConstraintSet<P> + ?Sized,
    C2: ConstraintSet<P> + ?Sized,
{
    cfg.validate()?;
    let start = Instant::now();
    let mut x = x0.clone();
    let mut records = Vec::new();
    let mut residuals = Vec::new();
    let mut steps = Vec::new();
    let mut n = 0;
    loop {
        let p = c1.project(&x)?;
        let q = c2.project(&p)?;
        let residual = p.dist(&q);
        residuals.push(residual);
        let status = if residual <= cfg.tol {
            Some(SolveStatus::Converged)
        } else if n == cfg.max_iter {
            Some(SolveStatus::MaxIter)
        } else if residuals.len() >= 2 * cfg.stall_window && stalled(&residuals, &steps, cfg.stall_window) {
            Some(SolveStatus::Stalled)
        } else {
            None
        };
        if let Some(status) = status {
            records.push(TraceRecord { iteration: n, residual, step_norm: 0.0, time_ms: ms(start) });
            let mut trace = SolveTrace { method, status, records, rate: None };
            trace.rate = estimate_rate(&trace).ok();
            return Ok(SolveOutcome { shadow: p, partner: q, last_iterate: x, trace });
        }
        let next = match method {
            // T x = x + P2(2p − x) − p
            SolverMethod::Dr => {
                let r = c2.project(&p.axpby(2.0, &x, -1.0))?;
                x.axpby(1.0, &r, 1.0).axpby(1.0, &p, -1.0)
            }
            SolverMethod::Map => c1.project(&c2.project(&x)?)?,
        };
        let step_norm = next.dist(&x);
        steps.push(step_norm);
        records.push(TraceRecord { iteration: n, residual, step_norm, time_ms: ms(start) });
        x = next;
        n += 1;
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Douglas–Rachford: `x_{n+1} = (x_n + R_{C2}R_{C1}x_n)/2`; returns the
/// shadow `P_{C1}x` of the final iterate.
pub fn solve_dr<P, C1, C2>(c1: &C1, c2: &C2, x0: &P, cfg: &SolverConfig) -> Result<SolveOutcome<P>>
where
    P: Point,
    C1: ConstraintSet<P> + ?Sized,
    C2: ConstraintSet<P> + ?Sized,
{
    run(SolverMethod::Dr, c1, c2, x0, cfg)
}

/// Alternating projections: `x_{n+1} = P_{C1}(P_{C2}(x_n))`.
pub fn solve_map<P, C1, C2>(c1: &C1, c2: &C2, x0: &P, cfg: &SolverConfig) -> Result<SolveOutcome<P>>
where
    P: Point,
    C1: ConstraintSet<P> + ?Sized,
    C2: ConstraintSet<P> + ?Sized,
{
    run(SolverMethod::Map, c1, c2, x0, cfg)
}

pub fn solve<P, C1, C2>(method: SolverMethod, c1: &C1, c2: &C2, x0: &P, cfg: &SolverConfig) -> Result<SolveOutcome<P>>
where
    P: Point,
    C1: ConstraintSet<P> + ?Sized,
    C2: ConstraintSet<P> + ?Sized,
{
    run(method, c1, c2, x0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn line(a: Vec<f64>, b: f64) -> VectorSet {
        VectorSet::Affine(AffineSet::new(Matrix::from_rows(&[a]).unwrap(), vec![b]).unwrap())
    }

    #[test]
    fn convex_half_spaces_converge() {
        let h1 = VectorSet::HalfSpace { normal: vec![1.0, 0.0], offset: 0.0 };
        let h2 = VectorSet::HalfSpace { normal: vec![-1.0, -1.0], offset: -1.0 };
        let out = solve_dr(&h1, &h2, &vec![5.0, -7.0], &SolverConfig::default()).unwrap();
        assert_eq!(out.trace.status, SolveStatus::Converged);
        let p = &out.shadow;
        assert!(p[0] <= 1e-8 && p[0] + p[1] >= 1.0 - 1e-8);
    }

    #[test]
    fn disjoint_sets_never_converge() {
        let a = line(vec![1.0, 0.0], 0.0);
        let b = line(vec![1.0, 0.0], 1.0);
        let cfg = SolverConfig { max_iter: 2000, ..SolverConfig::default() };
        for method in [SolverMethod::Dr, SolverMethod::Map] {
            let out = solve(method, &a, &b, &vec![0.3, 0.3], &cfg).unwrap();
            assert_ne!(out.trace.status, SolveStatus::Converged);
        }
    }

    #[test]
    fn map_on_lines() {
        let a = line(vec![1.0, -1.0], 0.0);
        let b = line(vec![1.0, 1.0], 2.0);
        let out = solve_map(&a, &b, &vec![4.0, -3.0], &SolverConfig { tol: 1e-12, ..SolverConfig::default() }).unwrap();
        assert_eq!(out.trace.status, SolveStatus::Converged);
        assert!((out.shadow[0] - 1.0).abs() < 1e-10 && (out.shadow[1] - 1.0).abs() < 1e-10);
        let out = solve_map(&a, &b, &vec![1.0, 1.0], &SolverConfig::default()).unwrap();
        assert_eq!(out.trace.records.len(), 1);
    }

    #[test]
    fn max_iter_one() {
        let a = line(vec![1.0, -2.0], 0.0);
        let b = VectorSet::Ks { s: 1 };
        let cfg = SolverConfig { max_iter: 1, ..SolverConfig::default() };
        let out = solve_dr(&a, &b, &vec![3.0, 1.0], &cfg).unwrap();
        assert_eq!(out.trace.status, SolveStatus::MaxIter);
        assert_eq!(out.trace.records.len(), 2);
    }

    #[test]
    fn config_validation() {
        let bad = [
            SolverConfig { tol: 0.0, ..SolverConfig::default() },
            SolverConfig { max_iter: 0, ..SolverConfig::default() },
            SolverConfig { stall_window: 0, ..SolverConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(
                solve_dr(&VectorSet::Whole, &VectorSet::Whole, &vec![1.0], &cfg),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let p = planted_sparse(8, 2, 3).unwrap();
        let c1 = VectorSet::Affine(AffineSet::new(p.a.clone(), p.b.clone()).unwrap());
        let c2 = VectorSet::Ks { s: 2 };
        let x0: Vec<f64> = p.x_true.iter().map(|v| v + 0.01).collect();
        let cfg = SolverConfig { max_iter: 500, ..SolverConfig::default() };
        let a = solve_dr(&c1, &c2, &x0, &cfg).unwrap();
        let b = solve_dr(&c1, &c2, &x0, &cfg).unwrap();
        let strip = |t: &SolveTrace| {
            t.records.iter().map(|r| (r.residual.to_bits(), r.step_norm.to_bits())).collect::<Vec<_>>()
        };
        assert_eq!(strip(&a.trace), strip(&b.trace));
        assert_eq!(a.shadow, b.shadow);
    }
}

//! Dense phase-1 simplex for equality-form feasibility `A·x = b, x ≥ 0`.

use super::matrix::Matrix;
use crate::error::{dim_mismatch, Error, Result};

/// Objective value at or below which the phase-1 problem counts as feasible.
pub const FEASIBILITY_MARGIN: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;

/// Outcome of a phase-1 solve.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseOne {
    Feasible(Vec<f64>),
    Infeasible { min_infeasibility: f64 },
}

/// Decide whether `{x ≥ 0 : A·x = b}` is nonempty.
///
/// Minimizes the sum of artificial variables with Bland's rule, which cannot
/// cycle. `max_iter` bounds the number of pivots.
pub fn phase_one(a: &Matrix, b: &[f64], max_iter: usize) -> Result<PhaseOne> {
    let m = a.rows();
    let n = a.cols();
    if b.len() != m {
        return Err(dim_mismatch(format!("rhs of length {} for {m} constraints", b.len())));
    }
    // tableau: m rows of [A | I | b], objective row = reduced costs
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    let idx = |r: usize, c: usize| r * width + c;
    for r in 0..m {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for c in 0..n {
            t[idx(r, c)] = sign * a[(r, c)];
        }
        t[idx(r, n + r)] = 1.0;
        t[idx(r, width - 1)] = sign * b[r];
    }
    // reduced costs of min Σ artificials: c_j - Σ_r row_r
    for c in 0..width {
        if (n..n + m).contains(&c) {
            continue;
        }
        let s: f64 = (0..m).map(|r| t[idx(r, c)]).sum();
        t[idx(m, c)] = -s;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut iter = 0;
    loop {
        // Bland: smallest index with negative reduced cost
        let entering = (0..n + m).find(|&c| t[idx(m, c)] < -COST_TOL);
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let coef = t[idx(r, e)];
            if coef > PIVOT_TOL {
                let ratio = t[idx(r, width - 1)] / coef;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-14 || (ratio <= lratio + 1e-14 && basis[r] < basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        // the phase-1 objective is bounded below by zero, so a column with
        // no positive entry cannot improve it; treat as numerically done
        let Some((pr, _)) = leave else { break };
        iter += 1;
        if iter > max_iter {
            return Err(Error::NumericalFailure {
                what: "phase-1 simplex iteration cap".into(),
                residual: -t[idx(m, width - 1)],
            });
        }
        let piv = t[idx(pr, e)];
        for c in 0..width {
            t[idx(pr, c)] /= piv;
        }
        for r in 0..=m {
            if r == pr {
                continue;
            }
            let f = t[idx(r, e)];
            if f != 0.0 {
                for c in 0..width {
                    t[idx(r, c)] -= f * t[idx(pr, c)];
                }
            }
        }
        basis[pr] = e;
    }

    let objective = -t[idx(m, width - 1)];
    if objective > FEASIBILITY_MARGIN {
        return Ok(PhaseOne::Infeasible { min_infeasibility: objective });
    }
    let mut x = vec![0.0; n];
    for (r, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[idx(r, width - 1)].max(0.0);
        }
    }
    Ok(PhaseOne::Feasible(x))
}

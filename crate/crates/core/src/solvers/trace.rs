use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Douglas–Rachford
    Dr,
    /// Method of alternating projections
    Map,
}

/// One iteration: shadow residual at `x_n`, `‖x_{n+1} − x_n‖` (zero on the
/// final record), and wall time since the start of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub residual: f64,
    pub step_norm: f64,
    pub time_ms: f64,
}

/// Fitted R-linear rate `residual_n ≈ C·ρⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rho: f64,
    pub r2: f64,
    /// Number of residuals used in the fit.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub method: SolverMethod,
    pub status: SolveStatus,
    pub records: Vec<TraceRecord>,
    pub rate: Option<RateEstimate>,
}

/// Compact run summary for JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub method: SolverMethod,
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_residual: f64,
    pub elapsed_ms: f64,
    pub rate: Option<RateEstimate>,
}

impl SolveTrace {
    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual).collect()
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.residual)
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            method: self.method,
            status: self.status,
            iterations: self.records.last().map_or(0, |r| r.iteration),
            final_residual: self.final_residual(),
            elapsed_ms: self.records.last().map_or(0.0, |r| r.time_ms),
            rate: self.rate,
        }
    }

    /// CSV with columns `iteration,residual,step_norm,time_ms`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.records {
            wr.serialize(r).map_err(csv_err)?;
        }
        wr.flush().map_err(|e| Error::InvalidInput(format!("writing trace: {e}")))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Vec<TraceRecord>> {
        csv::Reader::from_reader(r).deserialize().map(|rec| rec.map_err(csv_err)).collect()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("trace CSV: {e}"))
}

/// R-linear rate of a run, fitted to the fixed-point residuals
/// `‖x_{n+1} − x_n‖` with [`estimate_rate_from`].
///
/// The shadow residual is not used: under DR it oscillates while its
/// envelope decays, so a log-linear fit to it is poor even on runs that
/// converge linearly.
pub fn estimate_rate(trace: &SolveTrace) -> Result<RateEstimate> {
    let pairs: Vec<(f64, f64)> = trace.records.iter().map(|r| (r.iteration as f64, r.step_norm)).collect();
    estimate_rate_from(&pairs)
}

/// Least-squares fit of `log residual_n` against `n`.
///
/// Uses residuals in `(0, 1)` from the final half of the records (or the
/// last ten usable ones if the final half has fewer); needs at least ten
/// usable residuals overall. `ρ = exp(slope)`; `r2` is the coefficient of
/// determination, 1 for a constant sequence.
pub fn estimate_rate_from(pairs: &[(f64, f64)]) -> Result<RateEstimate> {
    let usable: Vec<(f64, f64)> =
        pairs.iter().copied().filter(|(_, r)| r.is_finite() && *r > 0.0 && *r < 1.0).collect();
    if usable.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "rate estimation needs 10 residuals in (0, 1), found {}",
            usable.len()
        )));
    }
    let half = pairs.len() / 2;
    let cutoff = pairs[half].0;
    let mut tail: Vec<(f64, f64)> = usable.iter().copied().filter(|(n, _)| *n >= cutoff).collect();
    if tail.len() < 10 {
        tail = usable[usable.len() - 10..].to_vec();
    }
    let k = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / k;
    let my = tail.iter().map(|p| p.1.ln()).sum::<f64>() / k;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let syy: f64 = tail.iter().map(|p| (p.1.ln() - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = tail.iter().map(|p| (p.1.ln() - my - slope * (p.0 - mx)).powi(2)).sum();
    let r2 = if syy <= f64::EPSILON * k * (1.0 + my.abs()) { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateEstimate { rho: slope.exp(), r2, points: tail.len() })
}

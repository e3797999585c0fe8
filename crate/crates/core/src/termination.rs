//! Stopping criteria.
//!
//! Criteria are checked in a fixed priority order: `max_iterations`, `max_evals`,
//! `diameter_tol`, `consensus_stall`. The first one that fires is reported.

use serde::{Deserialize, Serialize};

use crate::error::{CbxError, Result};
use crate::real::Real;
use crate::trace::{StopReason, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StallSpec {
    /// Number of iterations the consensus is compared across.
    pub window: u64,
    /// Stop when the consensus moved less than this (Euclidean) over `window` iterations.
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminationSpec {
    /// Hard upper bound on iterations; always enforced.
    pub max_iterations: u64,
    pub max_evals: Option<u64>,
    /// Stop once the ensemble diameter is at or below this value.
    pub diameter_tol: Option<f64>,
    pub consensus_stall: Option<StallSpec>,
}

impl TerminationSpec {
    pub fn new(max_iterations: u64) -> Self {
        TerminationSpec {
            max_iterations,
            max_evals: None,
            diameter_tol: None,
            consensus_stall: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_evals == Some(0) {
            return Err(CbxError::config(
                "termination.max_evals",
                "must be positive",
            ));
        }
        if let Some(tol) = self.diameter_tol {
            if tol.is_nan() || tol < 0.0 {
                return Err(CbxError::config("termination.diameter_tol", "must be >= 0"));
            }
        }
        if let Some(stall) = self.consensus_stall {
            if stall.window == 0 {
                return Err(CbxError::config(
                    "termination.consensus_stall.window",
                    "must be positive",
                ));
            }
            if stall.tol.is_nan() || stall.tol < 0.0 {
                return Err(CbxError::config(
                    "termination.consensus_stall.tol",
                    "must be >= 0",
                ));
            }
        }
        Ok(())
    }
}

/// Returns the reason to stop after the last record of `trace`, if any.
///
/// An empty trace stops only when `max_iterations == 0`.
pub fn check_termination<T: Real>(
    spec: &TerminationSpec,
    trace: &[TraceRecord<T>],
) -> Option<StopReason> {
    let Some(last) = trace.last() else {
        return (spec.max_iterations == 0).then_some(StopReason::MaxIterations);
    };
    if last.iteration >= spec.max_iterations {
        return Some(StopReason::MaxIterations);
    }
    if spec.max_evals.is_some_and(|m| last.eval_count >= m) {
        return Some(StopReason::MaxEvals);
    }
    if spec
        .diameter_tol
        .is_some_and(|tol| last.diameter.to_f64_lossy() <= tol)
    {
        return Some(StopReason::DiameterTol);
    }
    if let Some(stall) = spec.consensus_stall {
        let window = usize::try_from(stall.window).unwrap_or(usize::MAX);
        if trace.len() > window {
            let earlier = &trace[trace.len() - 1 - window];
            let moved = last
                .consensus
                .iter()
                .zip(&earlier.consensus)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>()
                .sqrt();
            if moved.to_f64_lossy() < stall.tol {
                return Some(StopReason::ConsensusStall);
            }
        }
    }
    None
}

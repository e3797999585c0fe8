use serde::{Deserialize, Serialize};

use crate::real::Real;

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    MaxEvals,
    DiameterTol,
    ConsensusStall,
}

/// Statistics recorded after each iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct TraceRecord<T> {
    /// Number of completed iterations (the first record has `iteration == 1`).
    pub iteration: u64,
    /// Consensus point of the ensemble after the step (mean of per-particle points when polarized).
    pub consensus: Vec<T>,
    /// Lowest objective value evaluated so far in this run.
    pub best_value: T,
    /// Largest pairwise Euclidean distance between particles.
    pub diameter: T,
    /// Cumulative objective evaluations of this run, including initialization.
    pub eval_count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RunResult<T> {
    /// Final consensus point.
    pub minimizer_estimate: Vec<T>,
    /// Lowest objective value evaluated during the run.
    pub final_value: T,
    pub iterations: u64,
    pub eval_count: u64,
    pub stop_reason: StopReason,
    pub seed: u64,
}

//! Consensus-based optimization (CBO) and related interacting-particle methods.
//!
//! A swarm of particles explores a black-box objective. Each iteration the
//! particles are pulled toward a Gibbs-weighted consensus point and perturbed
//! by noise proportional to their distance from it. Variants:
//!
//! * standard CBO with isotropic or anisotropic noise, optionally mini-batched,
//! * polarized CBO (kernel-localized consensus per particle),
//! * CBO with memory effects (personal bests),
//! * consensus-based sampling (CBS), in sampling or optimization mode.
//!
//! All randomness comes from a counter-based generator keyed by
//! `(seed, stream, iteration, particle, axis)`, so a seed reproduces a run
//! exactly, sequentially or in parallel.
//!
//! ```
//! let x = cbx::minimize(|x| x[0] * x[0] + x[1] * x[1], 2).unwrap();
//! assert!(x.iter().all(|v| v.abs() < 1e-2));
//! ```
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below name the common instantiations.

pub mod bench;
pub mod config;
pub mod consensus;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod objective;
pub mod real;
pub mod rng;
pub mod termination;
pub mod trace;

pub use bench::{
    make_objective, run_benchmark, BenchReport, NamedObjective, ObjectiveKind, RunReport,
};
pub use config::{CbsMode, CbxConfig, InitSpec, NoiseModel, Variant};
pub use consensus::{
    consensus_point, log_weights, polarized_consensus, sym_matrix_sqrt, weighted_covariance,
    ConsensusResult, LogWeights,
};
pub use dynamics::{
    cbo_step, cbs_step, iterate, memory_step, minimize, partition_batches, step, Solver,
    StepContext, StepOutcome,
};
pub use ensemble::{diameter, init_ensemble, sample_positions, Ensemble};
pub use error::{CbxError, Result};
pub use objective::ObjectiveHandle;
pub use real::Real;
pub use rng::{rng_draw, CounterRng, Stream};
pub use termination::{check_termination, StallSpec, TerminationSpec};
pub use trace::{RunResult, StopReason, TraceRecord};

pub type Ensemble64 = Ensemble<f64>;
pub type Ensemble32 = Ensemble<f32>;
pub type Objective64 = ObjectiveHandle<f64>;
pub type Objective32 = ObjectiveHandle<f32>;
pub type Solver64<'o> = Solver<'o, f64>;
pub type Solver32<'o> = Solver<'o, f32>;
pub type TraceRecord64 = TraceRecord<f64>;
pub type RunResult64 = RunResult<f64>;

//! Iteration driver.
//!
//! [`Solver`] owns the state of one run and can be stepped by hand; [`iterate`]
//! runs it to termination. Each iteration evaluates every particle exactly
//! once, so a run costs `N` evaluations for initialization plus `N` per
//! iteration.

mod batch;
mod step;

pub use batch::{partition_batches, StepContext};
pub use step::{cbo_step, cbs_step, memory_step, step, StepOutcome};

use ndarray::{Array1, ArrayView1};

use crate::config::{CbxConfig, Variant};
use crate::consensus::{consensus_point, polarized_consensus};
use crate::ensemble::{init_ensemble, Ensemble};
use crate::error::Result;
use crate::objective::ObjectiveHandle;
use crate::real::Real;
use crate::termination::check_termination;
use crate::trace::{RunResult, StopReason, TraceRecord};

pub struct Solver<'o, T: Real> {
    config: CbxConfig,
    objective: &'o ObjectiveHandle<T>,
    ensemble: Ensemble<T>,
    values: Array1<T>,
    consensus: Array1<T>,
    best_value: T,
    iteration: u64,
    evals_at_start: u64,
    trace: Vec<TraceRecord<T>>,
}

impl<'o, T: Real> Solver<'o, T> {
    /// Validates `config`, draws the initial ensemble and evaluates it.
    pub fn new(config: CbxConfig, objective: &'o ObjectiveHandle<T>) -> Result<Self> {
        config.validate()?;
        let evals_at_start = objective.eval_count();
        let (ensemble, values) = init_ensemble(&config, objective)?;
        let consensus = summary_consensus(&config, &ensemble, values.view())?;
        let best_value = min_value(values.view());
        Ok(Solver {
            config,
            objective,
            ensemble,
            values,
            consensus,
            best_value,
            iteration: 0,
            evals_at_start,
            trace: Vec::new(),
        })
    }

    /// Advances the ensemble by one iteration and returns its trace record.
    ///
    /// Termination criteria are not consulted; see [`Solver::stop_reason`].
    pub fn step(&mut self) -> Result<&TraceRecord<T>> {
        let n = self.config.n_particles;
        let batch_size = self.config.effective_batch_size();
        let ctx = if batch_size < n {
            partition_batches(n, batch_size, self.config.seed, self.iteration)?
        } else {
            StepContext::full(n, self.iteration)
        };
        let out = step::step(
            &self.ensemble,
            self.values.view(),
            self.objective,
            &self.config,
            &ctx,
        )?;
        self.ensemble = out.ensemble;
        self.values = out.values;
        self.iteration += 1;
        self.best_value = self.best_value.min(min_value(self.values.view()));
        self.consensus = summary_consensus(&self.config, &self.ensemble, self.values.view())?;
        self.trace.push(TraceRecord {
            iteration: self.iteration,
            consensus: self.consensus.to_vec(),
            best_value: self.best_value,
            diameter: self.ensemble.diameter(),
            eval_count: self.eval_count(),
        });
        Ok(self.trace.last().expect("just pushed"))
    }

    /// The criterion that ends the run at the current state, if any.
    pub fn stop_reason(&self) -> Option<StopReason> {
        check_termination(&self.config.termination, &self.trace)
    }

    /// Steps until a termination criterion fires.
    pub fn run(mut self) -> Result<(RunResult<T>, Vec<TraceRecord<T>>)> {
        let stop_reason = loop {
            if let Some(reason) = self.stop_reason() {
                break reason;
            }
            self.step()?;
        };
        Ok((self.result(stop_reason), self.trace))
    }

    /// Summary of the run so far, reported as stopped for `stop_reason`.
    pub fn result(&self, stop_reason: StopReason) -> RunResult<T> {
        RunResult {
            minimizer_estimate: self.consensus.to_vec(),
            final_value: self.best_value,
            iterations: self.iteration,
            eval_count: self.eval_count(),
            stop_reason,
            seed: self.config.seed,
        }
    }

    pub fn config(&self) -> &CbxConfig {
        &self.config
    }

    pub fn ensemble(&self) -> &Ensemble<T> {
        &self.ensemble
    }

    /// Objective values at the current positions.
    pub fn values(&self) -> ArrayView1<'_, T> {
        self.values.view()
    }

    /// Consensus point of the current ensemble (as reported in the trace).
    pub fn consensus(&self) -> ArrayView1<'_, T> {
        self.consensus.view()
    }

    pub fn best_value(&self) -> T {
        self.best_value
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn trace(&self) -> &[TraceRecord<T>] {
        &self.trace
    }

    /// Evaluations spent by this run so far.
    pub fn eval_count(&self) -> u64 {
        self.objective.eval_count() - self.evals_at_start
    }
}

/// Runs `config` on `obj` until termination.
pub fn iterate<T: Real>(
    config: &CbxConfig,
    obj: &ObjectiveHandle<T>,
) -> Result<(RunResult<T>, Vec<TraceRecord<T>>)> {
    Solver::new(config.clone(), obj)?.run()
}

/// Minimizes `f` over `R^dimension` with default CBO settings and returns the consensus estimate.
pub fn minimize(
    f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    dimension: usize,
) -> Result<Vec<f64>> {
    let obj = ObjectiveHandle::new(f);
    let (result, _) = iterate(&CbxConfig::new(dimension), &obj)?;
    Ok(result.minimizer_estimate)
}

fn summary_consensus<T: Real>(
    config: &CbxConfig,
    ensemble: &Ensemble<T>,
    values: ArrayView1<T>,
) -> Result<Array1<T>> {
    let alpha = T::lit(config.alpha);
    let x = ensemble.positions.view();
    let cons = match (
        config.variant,
        &ensemble.personal_bests,
        &ensemble.personal_best_values,
    ) {
        (Variant::PolarizedCbo, _, _) => {
            polarized_consensus(x, values, alpha, T::lit(config.kernel_width))?
        }
        (Variant::MemoryCbo, Some(y), Some(fy)) => consensus_point(y.view(), fy.view(), alpha)?,
        _ => consensus_point(x, values, alpha)?,
    };
    Ok(cons.summary())
}

fn min_value<T: Real>(values: ArrayView1<T>) -> T {
    values.iter().copied().fold(T::infinity(), T::min)
}

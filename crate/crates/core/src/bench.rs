//! Test objectives with known minimizers and a seeded success-rate harness.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::CbxConfig;
use crate::dynamics::iterate;
use crate::error::{CbxError, Result};
use crate::objective::ObjectiveHandle;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Sphere,
    Ackley,
    Rastrigin,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [
        ObjectiveKind::Sphere,
        ObjectiveKind::Ackley,
        ObjectiveKind::Rastrigin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Sphere => "sphere",
            ObjectiveKind::Ackley => "ackley",
            ObjectiveKind::Rastrigin => "rastrigin",
        }
    }

    pub fn value<T: Real>(self, x: &[T]) -> T {
        match self {
            ObjectiveKind::Sphere => sphere(x),
            ObjectiveKind::Ackley => ackley(x),
            ObjectiveKind::Rastrigin => rastrigin(x),
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = CbxError;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                CbxError::config(
                    "objective",
                    format!("unknown objective `{s}` (expected sphere, ackley or rastrigin)"),
                )
            })
    }
}

/// `Σ x_k²`
pub fn sphere<T: Real>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum()
}

/// Ackley with `a = 20`, `b = 0.2`, `c = 2π`:
/// `−a·exp(−b·√(mean x²)) − exp(mean cos(c x)) + a + e`.
///
/// Summed as `a(1 − exp(..)) + (e − exp(..))`, which is exactly zero at the origin.
pub fn ackley<T: Real>(x: &[T]) -> T {
    let n = T::lit(x.len() as f64);
    let a = T::lit(20.0);
    let b = T::lit(0.2);
    let c = T::TAU();
    let mean_sq = x.iter().map(|&v| v * v).sum::<T>() / n;
    let mean_cos = x.iter().map(|&v| (c * v).cos()).sum::<T>() / n;
    a * (T::one() - (-b * mean_sq.sqrt()).exp()) + (T::E() - mean_cos.exp())
}

/// Rastrigin: `10d + Σ (x_k² − 10 cos(2π x_k))`, summed as `Σ (x_k² + 10(1 − cos 2πx_k))`.
pub fn rastrigin<T: Real>(x: &[T]) -> T {
    let ten = T::lit(10.0);
    x.iter()
        .map(|&v| v * v + ten * (T::one() - (T::TAU() * v).cos()))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedObjective {
    pub kind: ObjectiveKind,
    pub dimension: usize,
    pub known_minimizer: Vec<f64>,
    pub known_minimum_value: f64,
}

impl NamedObjective {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn value<T: Real>(&self, x: &[T]) -> T {
        self.kind.value(x)
    }

    /// A fresh evaluation handle (counter at zero) carrying the known minimum.
    pub fn handle<T: Real>(&self) -> ObjectiveHandle<T> {
        let kind = self.kind;
        ObjectiveHandle::new(move |x: &[T]| kind.value(x)).with_known_minimum(
            self.known_minimizer.iter().map(|&v| T::lit(v)).collect(),
            T::lit(self.known_minimum_value),
        )
    }
}

pub fn make_objective(name: &str, dimension: usize) -> Result<NamedObjective> {
    let kind: ObjectiveKind = name.parse()?;
    if dimension == 0 {
        return Err(CbxError::config("dimension", "must be at least 1"));
    }
    Ok(NamedObjective {
        kind,
        dimension,
        known_minimizer: vec![0.0; dimension],
        known_minimum_value: 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    /// Euclidean distance from the final consensus to the known minimizer.
    pub distance: f64,
    pub iterations: u64,
    pub eval_count: u64,
    /// Monotonic wall time of the run; not covered by any determinism guarantee.
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub tolerance: f64,
    pub per_run: Vec<RunReport>,
}

impl BenchReport {
    pub fn mean_evals(&self) -> f64 {
        self.per_run
            .iter()
            .map(|r| r.eval_count as f64)
            .sum::<f64>()
            / self.runs as f64
    }

    pub fn mean_wall_ms(&self) -> f64 {
        self.per_run.iter().map(|r| r.wall_ms).sum::<f64>() / self.runs as f64
    }
}

/// Runs `config` once per seed in `base_seed..base_seed + runs` and counts a
/// run as a success when its final consensus lies strictly within `tolerance`
/// of the known minimizer. Runs go through the rayon pool when `config.parallel`.
pub fn run_benchmark<T: Real>(
    config: &CbxConfig,
    objective: &NamedObjective,
    runs: usize,
    base_seed: u64,
    tolerance: f64,
) -> Result<BenchReport> {
    if runs == 0 {
        return Err(CbxError::config("runs", "must be at least 1"));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(CbxError::config("tolerance", "must be >= 0"));
    }
    if objective.dimension != config.dimension {
        return Err(CbxError::config(
            "dimension",
            format!(
                "objective has dimension {}, config has {}",
                objective.dimension, config.dimension
            ),
        ));
    }
    let one = |k: usize| -> Result<RunReport> {
        let seed = base_seed.wrapping_add(k as u64);
        let cfg = config.clone().with_seed(seed);
        let obj = objective.handle::<T>();
        let start = Instant::now();
        let (result, _) = iterate(&cfg, &obj).map_err(|e| CbxError::Run {
            seed,
            source: Box::new(e),
        })?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let distance = result
            .minimizer_estimate
            .iter()
            .zip(&objective.known_minimizer)
            .map(|(&x, &m)| (x.to_f64_lossy() - m).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(RunReport {
            seed,
            distance,
            iterations: result.iterations,
            eval_count: result.eval_count,
            wall_ms,
        })
    };
    let per_run: Vec<RunReport> = if config.parallel {
        (0..runs).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..runs).map(one).collect::<Result<_>>()?
    };
    let successes = per_run.iter().filter(|r| r.distance < tolerance).count();
    Ok(BenchReport {
        runs,
        successes,
        success_rate: successes as f64 / runs as f64,
        tolerance,
        per_run,
    })
}

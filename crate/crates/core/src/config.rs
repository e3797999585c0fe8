//! Method configuration.
//!
//! All parameters are stored as `f64` regardless of the scalar type a run uses;
//! they are converted once when a step is taken.

use serde::{Deserialize, Serialize};

use crate::error::{CbxError, Result};
use crate::termination::TerminationSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Standard consensus-based optimization, optionally mini-batched.
    Cbo,
    /// Each particle follows its own kernel-localized consensus point.
    PolarizedCbo,
    /// Consensus over personal bests plus a drift toward each particle's own best.
    MemoryCbo,
    /// Consensus-based sampling with covariance-shaped noise.
    Cbs,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Noise scaled by the full distance `‖x − c‖`.
    #[default]
    Isotropic,
    /// Noise scaled componentwise by `|x_k − c_k|`.
    Anisotropic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CbsMode {
    /// Stationary law approximates `exp(−f)`.
    #[default]
    Sampling,
    /// Ensemble concentrates on the minimizer.
    Optimization,
}

/// How the initial ensemble is drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// Independent uniform coordinates on `[lower_k, upper_k]`.
    UniformBox { lower: Vec<f64>, upper: Vec<f64> },
    /// Isotropic normal around `mean`.
    Gaussian { mean: Vec<f64>, stddev: f64 },
}

impl InitSpec {
    /// Uniform on `[−3, 3]^d`.
    pub fn default_box(dimension: usize) -> Self {
        InitSpec::UniformBox {
            lower: vec![-3.0; dimension],
            upper: vec![3.0; dimension],
        }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        match self {
            InitSpec::UniformBox { lower, upper } => {
                if lower.len() != dimension {
                    return Err(CbxError::config(
                        "init.lower",
                        format!("expected {dimension} entries, got {}", lower.len()),
                    ));
                }
                if upper.len() != dimension {
                    return Err(CbxError::config(
                        "init.upper",
                        format!("expected {dimension} entries, got {}", upper.len()),
                    ));
                }
                for (k, (lo, hi)) in lower.iter().zip(upper).enumerate() {
                    if !lo.is_finite() || !hi.is_finite() {
                        return Err(CbxError::config("init", format!("bound {k} is not finite")));
                    }
                    // lower == upper is a degenerate (point) box and is allowed.
                    if lo > hi {
                        return Err(CbxError::config(
                            "init",
                            format!("lower[{k}] = {lo} exceeds upper[{k}] = {hi}"),
                        ));
                    }
                }
            }
            InitSpec::Gaussian { mean, stddev } => {
                if mean.len() != dimension {
                    return Err(CbxError::config(
                        "init.mean",
                        format!("expected {dimension} entries, got {}", mean.len()),
                    ));
                }
                if mean.iter().any(|m| !m.is_finite()) {
                    return Err(CbxError::config("init.mean", "entries must be finite"));
                }
                if !(stddev.is_finite() && *stddev >= 0.0) {
                    return Err(CbxError::config("init.stddev", "must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }
}

/// Full specification of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbxConfig {
    pub variant: Variant,
    pub n_particles: usize,
    pub dimension: usize,
    /// Inverse temperature of the Gibbs weights.
    pub alpha: f64,
    /// Drift rate toward the consensus point.
    pub lambda: f64,
    /// Diffusion strength.
    pub sigma: f64,
    /// Step size.
    pub dt: f64,
    pub noise: NoiseModel,
    /// Mini-batch size; `None` means the full ensemble. Ignored by CBS.
    pub batch_size: Option<usize>,
    /// Gaussian kernel width κ, used only by the polarized variant. May be `+∞`.
    pub kernel_width: f64,
    /// Drift rate toward the personal best (memory variant).
    pub memory_drift: f64,
    /// Diffusion strength of the personal-best term (memory variant).
    pub memory_sigma: f64,
    pub cbs_mode: CbsMode,
    pub init: InitSpec,
    pub termination: TerminationSpec,
    pub seed: u64,
    /// Fan objective evaluations and particle updates out over the rayon pool.
    pub parallel: bool,
}

pub const DEFAULT_N_PARTICLES: usize = 50;
pub const DEFAULT_ALPHA: f64 = 1e5;
pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_KERNEL_WIDTH: f64 = 1.0;
pub const DEFAULT_MAX_ITERATIONS: u64 = 1000;
/// Memory drift default, as a multiple of `lambda`.
pub const DEFAULT_MEMORY_DRIFT_RATIO: f64 = 0.4;

impl CbxConfig {
    /// Standard CBO with default parameters for a `dimension`-dimensional problem.
    pub fn new(dimension: usize) -> Self {
        CbxConfig {
            variant: Variant::Cbo,
            n_particles: DEFAULT_N_PARTICLES,
            dimension,
            alpha: DEFAULT_ALPHA,
            lambda: DEFAULT_LAMBDA,
            sigma: DEFAULT_SIGMA,
            dt: DEFAULT_DT,
            noise: NoiseModel::Isotropic,
            batch_size: None,
            kernel_width: DEFAULT_KERNEL_WIDTH,
            memory_drift: DEFAULT_MEMORY_DRIFT_RATIO * DEFAULT_LAMBDA,
            memory_sigma: DEFAULT_SIGMA,
            cbs_mode: CbsMode::Sampling,
            init: InitSpec::default_box(dimension),
            termination: TerminationSpec::new(DEFAULT_MAX_ITERATIONS),
            seed: 0,
            parallel: false,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_particles(mut self, n: usize) -> Self {
        self.n_particles = n;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: u64) -> Self {
        self.termination.max_iterations = max_iterations;
        self
    }

    /// Effective batch size: the configured value, or `N` when absent or for CBS.
    pub fn effective_batch_size(&self) -> usize {
        match (self.variant, self.batch_size) {
            (Variant::Cbs, _) | (_, None) => self.n_particles,
            (_, Some(m)) => m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(CbxError::config("n_particles", "must be at least 1"));
        }
        if self.dimension == 0 {
            return Err(CbxError::config("dimension", "must be at least 1"));
        }
        positive("alpha", self.alpha, true)?;
        positive("lambda", self.lambda, false)?;
        nonnegative("sigma", self.sigma)?;
        positive("dt", self.dt, false)?;
        if let Some(m) = self.batch_size {
            if m == 0 || m > self.n_particles {
                return Err(CbxError::config(
                    "batch_size",
                    format!(
                        "must lie in [1, n_particles = {}], got {m}",
                        self.n_particles
                    ),
                ));
            }
        }
        if self.variant == Variant::PolarizedCbo
            && (self.kernel_width.is_nan() || self.kernel_width <= 0.0)
        {
            return Err(CbxError::config("kernel_width", "must be > 0 (or +inf)"));
        }
        if self.variant == Variant::MemoryCbo {
            nonnegative("memory_drift", self.memory_drift)?;
            nonnegative("memory_sigma", self.memory_sigma)?;
        }
        self.init.validate(self.dimension)?;
        self.termination.validate()?;
        Ok(())
    }
}

fn positive(key: &str, v: f64, allow_zero: bool) -> Result<()> {
    let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
    if ok {
        Ok(())
    } else {
        Err(CbxError::config(
            key,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn nonnegative(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CbxError::config(
            key,
            format!("must be finite and >= 0, got {v}"),
        ))
    }
}

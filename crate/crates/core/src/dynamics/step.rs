//! One-iteration update rules.
//!
//! Every rule reads the pre-step ensemble only and writes each particle's new
//! row independently, so rows may be updated in parallel. Noise for particle
//! `i`, axis `k` at iteration `t` is always the counter-based draw keyed by
//! `(seed, t, i, k)`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, Axis, Zip};

use crate::config::{CbsMode, CbxConfig, NoiseModel, Variant};
use crate::consensus::{
    consensus_point, polarized_consensus, sym_matrix_sqrt, weighted_covariance,
};
use crate::ensemble::Ensemble;
use crate::error::{CbxError, Result};
use crate::objective::ObjectiveHandle;
use crate::real::Real;
use crate::rng::{CounterRng, Stream};

use super::batch::StepContext;

/// Post-step ensemble and the objective values at its positions.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome<T> {
    pub ensemble: Ensemble<T>,
    pub values: Array1<T>,
}

/// Dispatches to the rule for `config.variant`.
pub fn step<T: Real>(
    ensemble: &Ensemble<T>,
    values: ArrayView1<T>,
    obj: &ObjectiveHandle<T>,
    config: &CbxConfig,
    ctx: &StepContext,
) -> Result<StepOutcome<T>> {
    match config.variant {
        Variant::Cbo | Variant::PolarizedCbo => cbo_step(ensemble, values, obj, config, ctx),
        Variant::MemoryCbo => memory_step(ensemble, obj, config, ctx),
        Variant::Cbs => cbs_step(ensemble, values, obj, config, ctx),
    }
}

/// Euler–Maruyama step of consensus-based optimization:
///
/// `x ← x − λΔt (x − c) + σ √Δt ‖x − c‖ ξ` (isotropic), or with
/// `|x_k − c_k| ξ_k` per component (anisotropic).
///
/// `c` is the consensus of the particle's batch, or its kernel-localized
/// consensus for the polarized variant. `values` are the objective values at
/// the current positions; the new positions are evaluated once before returning.
pub fn cbo_step<T: Real>(
    ensemble: &Ensemble<T>,
    values: ArrayView1<T>,
    obj: &ObjectiveHandle<T>,
    config: &CbxConfig,
    ctx: &StepContext,
) -> Result<StepOutcome<T>> {
    let x = ensemble.positions.view();
    let targets = consensus_targets(x, values, config, ctx)?;
    let lambda_dt = T::lit(config.lambda) * T::lit(config.dt);
    let sigma_sqrt_dt = T::lit(config.sigma) * T::lit(config.dt).sqrt();
    let rng = CounterRng::new(config.seed);
    let noise = config.noise;

    let mut next = Array2::zeros(x.raw_dim());
    update_rows(&mut next, config.parallel, |i, mut out| {
        let xi = x.row(i);
        let ci = targets.row(i);
        let scale = diffusion_scale(xi, ci, noise);
        for k in 0..xi.len() {
            let diff = xi[k] - ci[k];
            let xi_k = T::lit(rng.normal(Stream::Noise, ctx.iteration, i as u64, k as u64));
            out[k] = xi[k] - lambda_dt * diff + sigma_sqrt_dt * scale.at(diff) * xi_k;
        }
    });
    check_finite(&next, ctx.iteration)?;
    let new_values = obj.evaluate_batch(next.view(), config.parallel)?;
    Ok(StepOutcome {
        ensemble: Ensemble {
            positions: next,
            ..ensemble.clone()
        },
        values: new_values,
    })
}

/// CBO with memory effects.
///
/// The consensus is taken over personal bests `y`; each particle also drifts
/// toward (and diffuses around) its own best:
///
/// `x ← x − λΔt(x − c(y)) − λ₂Δt(x − yᵢ) + σ√Δt ‖x − c(y)‖ ξ + σ₂√Δt ‖x − yᵢ‖ ξ′`
///
/// Afterwards `yᵢ ← xᵢ` wherever the new value is strictly lower.
pub fn memory_step<T: Real>(
    ensemble: &Ensemble<T>,
    obj: &ObjectiveHandle<T>,
    config: &CbxConfig,
    ctx: &StepContext,
) -> Result<StepOutcome<T>> {
    let (Some(bests), Some(best_values)) =
        (&ensemble.personal_bests, &ensemble.personal_best_values)
    else {
        return Err(CbxError::config(
            "personal_bests",
            "memory step needs personal-best state",
        ));
    };
    let x = ensemble.positions.view();
    let targets = consensus_targets(bests.view(), best_values.view(), config, ctx)?;
    let sqrt_dt = T::lit(config.dt).sqrt();
    let lambda_dt = T::lit(config.lambda) * T::lit(config.dt);
    let sigma_sqrt_dt = T::lit(config.sigma) * sqrt_dt;
    let memory_dt = T::lit(config.memory_drift) * T::lit(config.dt);
    let memory_sqrt_dt = T::lit(config.memory_sigma) * sqrt_dt;
    let rng = CounterRng::new(config.seed);
    let noise = config.noise;

    let mut next = Array2::zeros(x.raw_dim());
    update_rows(&mut next, config.parallel, |i, mut out| {
        let xi = x.row(i);
        let ci = targets.row(i);
        let yi = bests.row(i);
        let scale = diffusion_scale(xi, ci, noise);
        let mem_scale = diffusion_scale(xi, yi, noise);
        for k in 0..xi.len() {
            let diff = xi[k] - ci[k];
            let mem_diff = xi[k] - yi[k];
            let xi_k = T::lit(rng.normal(Stream::Noise, ctx.iteration, i as u64, k as u64));
            let xi2_k = T::lit(rng.normal(Stream::MemoryNoise, ctx.iteration, i as u64, k as u64));
            out[k] = xi[k] - lambda_dt * diff + sigma_sqrt_dt * scale.at(diff) * xi_k
                - memory_dt * mem_diff
                + memory_sqrt_dt * mem_scale.at(mem_diff) * xi2_k;
        }
    });
    check_finite(&next, ctx.iteration)?;
    let new_values = obj.evaluate_batch(next.view(), config.parallel)?;

    let mut bests = bests.clone();
    let mut best_values = best_values.clone();
    for (i, &v) in new_values.iter().enumerate() {
        if v < best_values[i] {
            best_values[i] = v;
            bests.row_mut(i).assign(&next.row(i));
        }
    }
    Ok(StepOutcome {
        ensemble: Ensemble {
            positions: next,
            personal_bests: Some(bests),
            personal_best_values: Some(best_values),
        },
        values: new_values,
    })
}

/// Consensus-based sampling, exponential-integrator form:
///
/// `x ← c + e^{−Δt}(x − c) + √(β(1 − e^{−2Δt})) · S ξ`, `S = √C`,
///
/// with `β = 1 + α` in sampling mode and `β = 1` in optimization mode. The
/// contraction is applied as `x − (1 − e^{−Δt})(x − c)` so that `Δt = 0`
/// leaves the ensemble bit-identical. Always uses the full ensemble.
pub fn cbs_step<T: Real>(
    ensemble: &Ensemble<T>,
    values: ArrayView1<T>,
    obj: &ObjectiveHandle<T>,
    config: &CbxConfig,
    ctx: &StepContext,
) -> Result<StepOutcome<T>> {
    let x = ensemble.positions.view();
    let alpha = T::lit(config.alpha);
    let mut cons = consensus_point(x, values, alpha)?;
    let center = cons.points.row(0).to_owned();
    let cov = weighted_covariance(x, cons.weights.view(), center.view())?;
    let root = sym_matrix_sqrt(cov.view())?;
    cons.covariance = Some(cov);

    let dt = T::lit(config.dt);
    let beta = match config.cbs_mode {
        CbsMode::Sampling => T::one() + alpha,
        CbsMode::Optimization => T::one(),
    };
    let contraction = -(-dt).exp_m1();
    let noise_factor = (beta * -(-(dt + dt)).exp_m1()).sqrt();
    let rng = CounterRng::new(config.seed);
    let d = x.ncols();

    let mut next = Array2::zeros(x.raw_dim());
    update_rows(&mut next, config.parallel, |i, mut out| {
        let xi = x.row(i);
        let draws: Array1<T> = (0..d)
            .map(|k| T::lit(rng.normal(Stream::Noise, ctx.iteration, i as u64, k as u64)))
            .collect();
        let shaped = root.dot(&draws);
        for k in 0..d {
            out[k] = xi[k] - contraction * (xi[k] - center[k]) + noise_factor * shaped[k];
        }
    });
    check_finite(&next, ctx.iteration)?;
    let new_values = obj.evaluate_batch(next.view(), config.parallel)?;
    Ok(StepOutcome {
        ensemble: Ensemble {
            positions: next,
            ..ensemble.clone()
        },
        values: new_values,
    })
}

/// Per-particle drift targets (`N × d`): batch consensus, or polarized consensus within the batch.
fn consensus_targets<T: Real>(
    points: ArrayView2<T>,
    values: ArrayView1<T>,
    config: &CbxConfig,
    ctx: &StepContext,
) -> Result<Array2<T>> {
    if ctx.assignment.len() != points.nrows() {
        return Err(CbxError::Shape(format!(
            "step context covers {} particles, ensemble has {}",
            ctx.assignment.len(),
            points.nrows()
        )));
    }
    let alpha = T::lit(config.alpha);
    let consensus_of = |p: ArrayView2<T>, v: ArrayView1<T>| match config.variant {
        Variant::PolarizedCbo => polarized_consensus(p, v, alpha, T::lit(config.kernel_width)),
        _ => consensus_point(p, v, alpha),
    };
    let mut targets = Array2::zeros(points.raw_dim());
    if ctx.is_full() {
        let cons = consensus_of(points, values)?;
        for (i, mut row) in targets.outer_iter_mut().enumerate() {
            row.assign(&cons.point_for(i));
        }
        return Ok(targets);
    }
    for batch in &ctx.batches {
        let p = points.select(Axis(0), batch);
        let v = values.select(Axis(0), batch);
        let cons = consensus_of(p.view(), v.view())?;
        for (local, &i) in batch.iter().enumerate() {
            targets.row_mut(i).assign(&cons.point_for(local));
        }
    }
    Ok(targets)
}

#[derive(Clone, Copy)]
enum Scale<T> {
    Isotropic(T),
    Anisotropic,
}

impl<T: Real> Scale<T> {
    #[inline]
    fn at(self, diff: T) -> T {
        match self {
            Scale::Isotropic(norm) => norm,
            Scale::Anisotropic => diff.abs(),
        }
    }
}

fn diffusion_scale<T: Real>(x: ArrayView1<T>, c: ArrayView1<T>, noise: NoiseModel) -> Scale<T> {
    match noise {
        NoiseModel::Isotropic => Scale::Isotropic(
            x.iter()
                .zip(c)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>()
                .sqrt(),
        ),
        NoiseModel::Anisotropic => Scale::Anisotropic,
    }
}

fn update_rows<T, F>(next: &mut Array2<T>, parallel: bool, f: F)
where
    T: Real,
    F: Fn(usize, ArrayViewMut1<T>) + Sync + Send,
{
    let zip = Zip::indexed(next.rows_mut());
    if parallel {
        zip.par_for_each(&f);
    } else {
        zip.for_each(f);
    }
}

fn check_finite<T: Real>(positions: &Array2<T>, iteration: u64) -> Result<()> {
    match positions
        .outer_iter()
        .position(|row| row.iter().any(|v| !v.is_finite()))
    {
        Some(particle) => Err(CbxError::NonFinitePosition {
            iteration,
            particle,
        }),
        None => Ok(()),
    }
}

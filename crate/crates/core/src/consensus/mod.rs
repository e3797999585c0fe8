//! Gibbs-weighted consensus computations.
//!
//! Weights are `exp(−α f_i)` normalized over the ensemble. They are evaluated
//! after shifting every value by `min_j f_j`, so the largest weight is
//! exactly `exp(0) = 1` before normalization and nothing overflows for any
//! finite `α`.

mod covariance;

pub use covariance::{sym_matrix_sqrt, weighted_covariance};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{CbxError, Result};
use crate::real::Real;

/// Normalized Gibbs weights together with the stabilizing shift.
#[derive(Clone, Debug, PartialEq)]
pub struct LogWeights<T> {
    /// Nonnegative, sums to one.
    pub weights: Array1<T>,
    /// `min_j f_j`, subtracted from every value before exponentiation.
    pub shift: T,
    /// `ln Σ_j exp(−α (f_j − shift))`; always `>= 0`.
    pub log_normalizer: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsensusResult<T> {
    /// `1 × d` for the standard consensus, `N × d` for per-particle (polarized) consensus.
    pub points: Array2<T>,
    pub weights: Array1<T>,
    pub shift: T,
    pub log_normalizer: T,
    /// Weighted covariance around the consensus point, when requested.
    pub covariance: Option<Array2<T>>,
}

impl<T: Real> ConsensusResult<T> {
    pub fn is_per_particle(&self) -> bool {
        self.points.nrows() != 1
    }

    /// Consensus point seen by particle `i`.
    pub fn point_for(&self, i: usize) -> ArrayView1<'_, T> {
        if self.is_per_particle() {
            self.points.row(i)
        } else {
            self.points.row(0)
        }
    }

    /// A single d-vector: the consensus point, or the mean of the per-particle points.
    pub fn summary(&self) -> Array1<T> {
        if self.is_per_particle() {
            crate::ensemble::row_mean(self.points.view())
        } else {
            self.points.row(0).to_owned()
        }
    }
}

pub fn log_weights<T: Real>(values: ArrayView1<T>, alpha: T) -> Result<LogWeights<T>> {
    if values.is_empty() {
        return Err(CbxError::Shape("cannot weight an empty ensemble".into()));
    }
    if !(alpha >= T::zero() && alpha.is_finite()) {
        return Err(CbxError::config("alpha", "must be finite and >= 0"));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(CbxError::NonFiniteInput { index });
    }
    let shift = values.iter().copied().fold(T::infinity(), T::min);
    // (f − shift) >= 0, so every exponent is <= 0; α·0 stays 0 for finite α.
    let mut weights = values.mapv(|f| (-(alpha * (f - shift))).exp());
    let total = weights.sum();
    weights /= total;
    Ok(LogWeights {
        weights,
        shift,
        log_normalizer: total.ln(),
    })
}

/// Gibbs-weighted mean of the rows of `positions`.
pub fn consensus_point<T: Real>(
    positions: ArrayView2<T>,
    values: ArrayView1<T>,
    alpha: T,
) -> Result<ConsensusResult<T>> {
    check_rows(positions, values)?;
    let lw = log_weights(values, alpha)?;
    let mut point = lw.weights.dot(&positions);
    clamp_to_hull(point.view_mut(), positions);
    Ok(ConsensusResult {
        points: point.insert_axis(Axis(0)),
        weights: lw.weights,
        shift: lw.shift,
        log_normalizer: lw.log_normalizer,
        covariance: None,
    })
}

/// Per-particle consensus localized by a Gaussian kernel of width `kernel_width`.
///
/// Particle `i` sees `Σ_j k_ij w_j x_j / Σ_j k_ij w_j` with
/// `k_ij = exp(−‖x_i − x_j‖² / (2κ²))`. An infinite width makes the kernel
/// constant and reproduces [`consensus_point`] for every particle.
pub fn polarized_consensus<T: Real>(
    positions: ArrayView2<T>,
    values: ArrayView1<T>,
    alpha: T,
    kernel_width: T,
) -> Result<ConsensusResult<T>> {
    check_rows(positions, values)?;
    if kernel_width.is_nan() || kernel_width <= T::zero() {
        return Err(CbxError::config("kernel_width", "must be > 0 (or +inf)"));
    }
    let lw = log_weights(values, alpha)?;
    let n = positions.nrows();
    let two_k2 = T::lit(2.0) * kernel_width * kernel_width;
    let gibbs_exponent = values.mapv(|f| -(alpha * (f - lw.shift)));

    let mut points = Array2::zeros(positions.raw_dim());
    let mut exponent = Array1::zeros(n);
    for (i, mut out) in points.outer_iter_mut().enumerate() {
        let xi = positions.row(i);
        for (j, e) in exponent.iter_mut().enumerate() {
            let dist2 = xi
                .iter()
                .zip(positions.row(j))
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>();
            *e = gibbs_exponent[j] - dist2 / two_k2;
        }
        // j == i has a kernel factor of one, so the max is finite.
        let m = exponent.iter().copied().fold(T::neg_infinity(), T::max);
        let w = exponent.mapv(|e| (e - m).exp());
        let total = w.sum();
        out.assign(&(w.dot(&positions) / total));
        clamp_to_hull(out, positions);
    }
    Ok(ConsensusResult {
        points,
        weights: lw.weights,
        shift: lw.shift,
        log_normalizer: lw.log_normalizer,
        covariance: None,
    })
}

fn check_rows<T>(positions: ArrayView2<T>, values: ArrayView1<T>) -> Result<()> {
    if positions.nrows() != values.len() {
        return Err(CbxError::Shape(format!(
            "{} particles but {} objective values",
            positions.nrows(),
            values.len()
        )));
    }
    Ok(())
}

/// A convex combination can leave the hull by an ulp through rounding; pull it back.
fn clamp_to_hull<T: Real>(mut point: ndarray::ArrayViewMut1<T>, positions: ArrayView2<T>) {
    for (k, c) in point.iter_mut().enumerate() {
        let col = positions.column(k);
        let lo = col.iter().copied().fold(T::infinity(), T::min);
        let hi = col.iter().copied().fold(T::neg_infinity(), T::max);
        *c = c.max(lo).min(hi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    // 1/(1+e), evaluated with mpmath at 50 digits.
    const INV_ONE_PLUS_E: f64 = 0.268_941_421_369_995_120_748_840_758_178_2;
    const ONE_OVER_ONE_PLUS_INV_E: f64 = 0.731_058_578_630_004_879_251_159_241_821_8;

    #[test]
    fn two_point_weights() {
        let lw = log_weights(array![0.0, 1.0].view(), 1.0).unwrap();
        assert_abs_diff_eq!(lw.weights[0], ONE_OVER_ONE_PLUS_INV_E, epsilon = 1e-15);
        assert_abs_diff_eq!(lw.weights[1], INV_ONE_PLUS_E, epsilon = 1e-15);
        assert_eq!(lw.shift, 0.0);
    }

    #[test]
    fn equal_values_give_uniform_weights() {
        for alpha in [0.0, 1.0, 1e300] {
            let lw = log_weights(array![5.0, 5.0, 5.0].view(), alpha).unwrap();
            for w in lw.weights {
                assert_abs_diff_eq!(w, 1.0 / 3.0, epsilon = 1e-16);
            }
        }
    }

    #[test]
    fn huge_alpha_concentrates() {
        let lw = log_weights(array![0.0, 1.0].view(), 1e15).unwrap();
        assert_eq!(lw.weights, array![1.0, 0.0]);
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(matches!(
            log_weights(array![0.0, f64::NAN].view(), 1.0),
            Err(CbxError::NonFiniteInput { index: 1 })
        ));
        assert!(log_weights(array![0.0, f64::INFINITY].view(), 1.0).is_err());
    }

    #[test]
    fn consensus_examples() {
        let x = array![[0.0], [1.0]];
        let f = x.column(0).mapv(|v| v * v);
        let c = consensus_point(x.view(), f.view(), 1.0).unwrap();
        assert_abs_diff_eq!(c.points[[0, 0]], INV_ONE_PLUS_E, epsilon = 1e-12);
        let c = consensus_point(x.view(), f.view(), 0.0).unwrap();
        assert_eq!(c.points[[0, 0]], 0.5);
        let c = consensus_point(x.view(), f.view(), 1e12).unwrap();
        assert_eq!(c.points[[0, 0]], 0.0);
    }

    #[test]
    fn row_mismatch_is_an_error() {
        let x = array![[0.0], [1.0]];
        assert!(matches!(
            consensus_point(x.view(), array![1.0].view(), 1.0),
            Err(CbxError::Shape(_))
        ));
    }

    #[test]
    fn polarized_single_particle() {
        let x = array![[0.3, -2.0]];
        let c = polarized_consensus(x.view(), array![4.0].view(), 10.0, 0.5).unwrap();
        assert_eq!(c.points, x);
    }

    #[test]
    fn polarized_rejects_bad_width() {
        let x = array![[0.0], [1.0]];
        let f = array![0.0, 1.0];
        assert!(polarized_consensus(x.view(), f.view(), 1.0, 0.0).is_err());
        assert!(polarized_consensus(x.view(), f.view(), 1.0, f64::NAN).is_err());
    }

    #[test]
    fn polarized_narrow_kernel_matches_double_loop() {
        let x: Array2<f64> = array![[-1.0], [0.0], [1.0]];
        let f: Array1<f64> = array![2.0, 2.0, 2.0];
        let kappa = 0.1f64;
        let c = polarized_consensus(x.view(), f.view(), 1.0, kappa).unwrap();
        for i in 0..3 {
            // direct summation without any stabilization
            let (mut num, mut den) = (0.0, 0.0);
            for j in 0..3 {
                let k = (-(x[[i, 0]] - x[[j, 0]]).powi(2) / (2.0 * kappa * kappa)).exp();
                let w = (-f[j]).exp(); // alpha = 1
                num += k * w * x[[j, 0]];
                den += k * w;
            }
            assert_abs_diff_eq!(c.points[[i, 0]], num / den, epsilon = 1e-12);
            assert_abs_diff_eq!(c.points[[i, 0]], x[[i, 0]], epsilon = 1e-12);
        }
    }

    #[test]
    fn summary_of_per_particle_points_is_their_mean() {
        let x = array![[-1.0], [0.0], [2.0]];
        let c = polarized_consensus(x.view(), array![1.0, 1.0, 1.0].view(), 1.0, 1e-3).unwrap();
        assert_abs_diff_eq!(c.summary()[0], 1.0 / 3.0, epsilon = 1e-12);
    }
}

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::config::{CbxConfig, InitSpec, Variant};
use crate::error::{CbxError, Result};
use crate::objective::ObjectiveHandle;
use crate::real::Real;
use crate::rng::{CounterRng, Stream};

/// `N` particles in `d` dimensions, plus personal-best state for the memory variant.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<T> {
    /// `N × d`, one particle per row.
    pub positions: Array2<T>,
    pub personal_bests: Option<Array2<T>>,
    pub personal_best_values: Option<Array1<T>>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(positions: Array2<T>) -> Self {
        Ensemble {
            positions,
            personal_bests: None,
            personal_best_values: None,
        }
    }

    /// Attaches personal bests equal to the current positions.
    pub fn with_personal_bests(mut self, values: Array1<T>) -> Self {
        self.personal_bests = Some(self.positions.clone());
        self.personal_best_values = Some(values);
        self
    }

    pub fn n_particles(&self) -> usize {
        self.positions.nrows()
    }

    pub fn dimension(&self) -> usize {
        self.positions.ncols()
    }

    pub fn diameter(&self) -> T {
        diameter(self.positions.view())
    }
}

/// Largest pairwise Euclidean distance between rows.
pub fn diameter<T: Real>(points: ArrayView2<T>) -> T {
    let n = points.nrows();
    let mut best = T::zero();
    for i in 0..n {
        let xi = points.row(i);
        for j in (i + 1)..n {
            let sq = xi
                .iter()
                .zip(points.row(j))
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>();
            if sq > best {
                best = sq;
            }
        }
    }
    best.sqrt()
}

/// Draws `n × d` initial positions from `spec` using the `Init` stream of `seed`.
pub fn sample_positions<T: Real>(
    spec: &InitSpec,
    n: usize,
    d: usize,
    seed: u64,
) -> Result<Array2<T>> {
    spec.validate(d)?;
    let rng = CounterRng::new(seed);
    let positions = match spec {
        InitSpec::UniformBox { lower, upper } => Array2::from_shape_fn((n, d), |(i, k)| {
            let u = rng.uniform(Stream::Init, 0, i as u64, k as u64);
            T::lit(lower[k] + (upper[k] - lower[k]) * u)
        }),
        InitSpec::Gaussian { mean, stddev } => Array2::from_shape_fn((n, d), |(i, k)| {
            let z = rng.normal(Stream::Init, 0, i as u64, k as u64);
            T::lit(mean[k] + stddev * z)
        }),
    };
    if let Some((i, _)) = positions.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(CbxError::NonFinitePosition {
            iteration: 0,
            particle: i.0,
        });
    }
    Ok(positions)
}

/// Builds the initial ensemble for `config` and evaluates it once.
///
/// Returns the ensemble and the objective values of its rows. For the memory
/// variant the personal bests start at the initial positions and share those
/// values, so initialization always costs exactly `N` evaluations.
pub fn init_ensemble<T: Real>(
    config: &CbxConfig,
    obj: &ObjectiveHandle<T>,
) -> Result<(Ensemble<T>, Array1<T>)> {
    if config.n_particles == 0 {
        return Err(CbxError::config("n_particles", "must be at least 1"));
    }
    if config.dimension == 0 {
        return Err(CbxError::config("dimension", "must be at least 1"));
    }
    let positions = sample_positions(
        &config.init,
        config.n_particles,
        config.dimension,
        config.seed,
    )?;
    let values = obj.evaluate_batch(positions.view(), config.parallel)?;
    let mut ensemble = Ensemble::new(positions);
    if config.variant == Variant::MemoryCbo {
        ensemble = ensemble.with_personal_bests(values.clone());
    }
    Ok((ensemble, values))
}

/// Per-coordinate mean of the rows.
pub(crate) fn row_mean<T: Real>(points: ArrayView2<T>) -> Array1<T> {
    points.mean_axis(Axis(0)).expect("at least one row")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn degenerate_box_is_a_point() {
        let spec = InitSpec::UniformBox {
            lower: vec![0.0, 0.0],
            upper: vec![0.0, 0.0],
        };
        let x: Array2<f64> = sample_positions(&spec, 3, 2, 1).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_spread_gaussian() {
        let spec = InitSpec::Gaussian {
            mean: vec![1.0, 1.0],
            stddev: 0.0,
        };
        let x: Array2<f64> = sample_positions(&spec, 5, 2, 1).unwrap();
        assert!(x.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn uniform_box_mean() {
        let spec = InitSpec::UniformBox {
            lower: vec![-1.0, -1.0],
            upper: vec![1.0, 1.0],
        };
        let x: Array2<f64> = sample_positions(&spec, 1000, 2, 42).unwrap();
        for m in row_mean(x.view()) {
            assert!(m.abs() < 0.1, "{m}");
        }
        assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn inverted_box_errors() {
        let spec = InitSpec::UniformBox {
            lower: vec![1.0],
            upper: vec![0.0],
        };
        assert!(matches!(
            sample_positions::<f64>(&spec, 2, 1, 0),
            Err(CbxError::Config { .. })
        ));
    }

    #[test]
    fn memory_init_shares_values() {
        let obj = ObjectiveHandle::new(|x: &[f64]| x[0] * x[0]);
        let cfg = CbxConfig::new(1)
            .with_variant(Variant::MemoryCbo)
            .with_particles(7);
        let (ens, values) = init_ensemble(&cfg, &obj).unwrap();
        assert_eq!(obj.eval_count(), 7);
        assert_eq!(ens.personal_bests.as_ref().unwrap(), &ens.positions);
        assert_eq!(ens.personal_best_values.as_ref().unwrap(), &values);
    }

    #[test]
    fn diameter_of_square() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        assert_eq!(diameter(x.view()), 2f64.sqrt());
        assert_eq!(diameter(array![[5.0, 5.0]].view()), 0.0);
    }
}

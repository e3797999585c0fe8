use std::borrow::Cow;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, ArrayView2};
use rayon::prelude::*;

use crate::error::{CbxError, Result};
use crate::real::Real;

type ObjectiveFn<T> = dyn Fn(&[T]) -> T + Send + Sync;

/// A black-box objective with an evaluation counter.
///
/// The function is assumed pure. Every single-point evaluation adds one to the
/// counter and a batch of `k` points adds `k`, whether or not it succeeds.
pub struct ObjectiveHandle<T> {
    f: Box<ObjectiveFn<T>>,
    evals: AtomicU64,
    known_minimizer: Option<Vec<T>>,
    known_minimum_value: Option<T>,
}

impl<T: Real> ObjectiveHandle<T> {
    pub fn new(f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        ObjectiveHandle {
            f: Box::new(f),
            evals: AtomicU64::new(0),
            known_minimizer: None,
            known_minimum_value: None,
        }
    }

    /// Attaches the known global minimizer and minimum value (used by benchmarks).
    pub fn with_known_minimum(mut self, minimizer: Vec<T>, value: T) -> Self {
        self.known_minimizer = Some(minimizer);
        self.known_minimum_value = Some(value);
        self
    }

    pub fn known_minimizer(&self) -> Option<&[T]> {
        self.known_minimizer.as_deref()
    }

    pub fn known_minimum_value(&self) -> Option<T> {
        self.known_minimum_value
    }

    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    /// Evaluates one point. A NaN or infinite result is an error.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        checked((self.f)(x), 0)
    }

    /// Evaluates every row of `points`, in row order.
    ///
    /// With `parallel` the rows are fanned out over the rayon pool; the result
    /// is identical either way. On failure the error carries the smallest
    /// offending row index.
    pub fn evaluate_batch(&self, points: ArrayView2<T>, parallel: bool) -> Result<Array1<T>> {
        let n = points.nrows();
        self.evals.fetch_add(n as u64, Ordering::Relaxed);
        let eval_row = |i: usize| {
            let row = points.row(i);
            let x: Cow<[T]> = match row.as_slice() {
                Some(s) => Cow::Borrowed(s),
                None => Cow::Owned(row.to_vec()),
            };
            checked((self.f)(&x), i)
        };
        let values: Result<Vec<T>> = if parallel {
            (0..n).into_par_iter().map(eval_row).collect()
        } else {
            (0..n).map(eval_row).collect()
        };
        values.map(Array1::from)
    }
}

fn checked<T: Real>(v: T, index: usize) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CbxError::Evaluation {
            index,
            value: v.to_f64_lossy(),
        })
    }
}

impl<T: Real> fmt::Debug for ObjectiveHandle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveHandle")
            .field("eval_count", &self.eval_count())
            .field("known_minimizer", &self.known_minimizer)
            .field("known_minimum_value", &self.known_minimum_value)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn sphere() -> ObjectiveHandle<f64> {
        ObjectiveHandle::new(|x: &[f64]| x.iter().map(|v| v * v).sum())
    }

    #[test]
    fn batch_values_and_count() {
        let obj = sphere();
        let v = obj
            .evaluate_batch(array![[0.0, 0.0], [3.0, 4.0]].view(), false)
            .unwrap();
        assert_eq!(v, array![0.0, 25.0]);
        assert_eq!(obj.eval_count(), 2);
        obj.eval(&[1.0, 1.0]).unwrap();
        assert_eq!(obj.eval_count(), 3);
    }

    #[test]
    fn empty_batch() {
        let obj = sphere();
        let v = obj
            .evaluate_batch(Array2::<f64>::zeros((0, 2)).view(), false)
            .unwrap();
        assert!(v.is_empty());
        assert_eq!(obj.eval_count(), 0);
    }

    #[test]
    fn parallel_matches_sequential() {
        let obj = sphere();
        let pts = Array2::from_shape_fn((257, 3), |(i, k)| (i as f64 * 0.37 + k as f64).sin());
        let a = obj.evaluate_batch(pts.view(), false).unwrap();
        let b = obj.evaluate_batch(pts.view(), true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_contiguous_rows() {
        let obj = sphere();
        let pts = array![[1.0, 2.0], [3.0, 4.0]];
        let v = obj.evaluate_batch(pts.t(), false).unwrap();
        assert_eq!(v, array![10.0, 20.0]);
    }

    #[test]
    fn nan_reports_index() {
        let obj = ObjectiveHandle::new(|x: &[f64]| if x[0] > 1.0 { f64::NAN } else { x[0] });
        let pts = array![[0.0], [0.5], [2.0], [3.0]];
        for parallel in [false, true] {
            match obj.evaluate_batch(pts.view(), parallel) {
                Err(CbxError::Evaluation { index, .. }) => assert_eq!(index, 2),
                other => panic!("unexpected {other:?}"),
            }
        }
    }
}

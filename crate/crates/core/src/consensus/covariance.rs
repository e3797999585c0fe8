use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{CbxError, Result};
use crate::real::Real;

/// `Σ_i w_i (x_i − c)(x_i − c)ᵀ`, exactly symmetric by construction.
pub fn weighted_covariance<T: Real>(
    positions: ArrayView2<T>,
    weights: ArrayView1<T>,
    center: ArrayView1<T>,
) -> Result<Array2<T>> {
    let (n, d) = positions.dim();
    if weights.len() != n || center.len() != d {
        return Err(CbxError::Shape(format!(
            "covariance of {n}×{d} ensemble with {} weights and a {}-dim center",
            weights.len(),
            center.len()
        )));
    }
    let mut cov = Array2::<T>::zeros((d, d));
    for (row, &w) in positions.outer_iter().zip(weights) {
        let dev = &row - &center;
        for a in 0..d {
            let wa = w * dev[a];
            for b in a..d {
                cov[[a, b]] += wa * dev[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            cov[[a, b]] = cov[[b, a]];
        }
    }
    Ok(cov)
}

/// Symmetric square root of a symmetric positive semidefinite matrix.
///
/// Uses a cyclic Jacobi eigendecomposition; eigenvalues below zero (rounding
/// noise on a PSD input) are clamped to zero. Inputs whose asymmetry exceeds
/// `1e-10 · max(1, max|C_ij|)` are rejected.
pub fn sym_matrix_sqrt<T: Real>(c: ArrayView2<T>) -> Result<Array2<T>> {
    let (n, m) = c.dim();
    if n != m {
        return Err(CbxError::Shape(format!(
            "matrix square root of a non-square {n}×{m} matrix"
        )));
    }
    if let Some(index) = c.iter().position(|v| !v.is_finite()) {
        return Err(CbxError::NonFiniteInput { index });
    }
    let scale = c.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    let tol = T::lit(1e-10).max(T::lit(64.0) * T::epsilon()) * scale;
    let mut asymmetry = T::zero();
    for i in 0..n {
        for j in 0..i {
            asymmetry = asymmetry.max((c[[i, j]] - c[[j, i]]).abs());
        }
    }
    if asymmetry > tol {
        return Err(CbxError::Asymmetric {
            asymmetry: asymmetry.to_f64_lossy(),
        });
    }

    let half = T::lit(0.5);
    let sym = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            c[[i, i]]
        } else {
            half * (c[[i, j]] + c[[j, i]])
        }
    });
    let (eigenvalues, vectors) = jacobi_eigen(sym);

    let mut s = Array2::<T>::zeros((n, n));
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let root = lambda.max(T::zero()).sqrt();
        if root == T::zero() {
            continue;
        }
        let v = vectors.column(k);
        for i in 0..n {
            let vi = root * v[i];
            for j in i..n {
                s[[i, j]] += vi * v[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            s[[i, j]] = s[[j, i]];
        }
    }
    Ok(s)
}

/// Eigenvalues and column eigenvectors of a symmetric matrix (cyclic Jacobi).
fn jacobi_eigen<T: Real>(mut a: Array2<T>) -> (Vec<T>, Array2<T>) {
    let n = a.nrows();
    let mut v = Array2::<T>::eye(n);
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let sq = a[[i, j]] * a[[i, j]];
                total += sq;
                if i != j {
                    off += sq;
                }
            }
        }
        if off == T::zero() || off <= T::epsilon() * T::epsilon() * total * T::lit(1e-6) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                if apq.abs() <= T::lit(1e-3) * T::epsilon() * (a[[p, p]].abs() + a[[q, q]].abs()) {
                    a[[p, q]] = T::zero();
                    a[[q, p]] = T::zero();
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (two * apq);
                let t = if theta.abs() > T::lit(1e150) {
                    T::one() / (two * theta)
                } else {
                    let sign = if theta < T::zero() {
                        -T::one()
                    } else {
                        T::one()
                    };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let cos = T::one() / (t * t + T::one()).sqrt();
                let sin = t * cos;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = cos * akp - sin * akq;
                    a[[k, q]] = sin * akp + cos * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = cos * apk - sin * aqk;
                    a[[q, k]] = sin * apk + cos * aqk;
                }
                a[[p, q]] = T::zero();
                a[[q, p]] = T::zero();
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = cos * vkp - sin * vkq;
                    v[[k, q]] = sin * vkp + cos * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[[i, i]]).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array1};

    #[test]
    fn single_particle_has_no_spread() {
        let x = array![[1.0, 2.0, 3.0]];
        let c = weighted_covariance(x.view(), array![1.0].view(), x.row(0)).unwrap();
        assert_eq!(c, Array2::zeros((3, 3)));
    }

    #[test]
    fn two_symmetric_points() {
        let x = array![[-1.0], [1.0]];
        let c = weighted_covariance(x.view(), array![0.5, 0.5].view(), array![0.0].view()).unwrap();
        assert_eq!(c, array![[1.0]]);
    }

    #[test]
    fn concentrated_weights() {
        let x = array![[1.0, 2.0], [3.0, -1.0], [0.0, 5.0]];
        let w = array![1.0, 0.0, 0.0];
        let c = weighted_covariance(x.view(), w.view(), x.row(0)).unwrap();
        assert_eq!(c, Array2::zeros((2, 2)));
    }

    #[test]
    fn sqrt_identity_and_diagonal() {
        let i3 = Array2::<f64>::eye(3);
        assert_eq!(sym_matrix_sqrt(i3.view()).unwrap(), i3);
        let d = array![[4.0, 0.0], [0.0, 9.0]];
        assert_eq!(
            sym_matrix_sqrt(d.view()).unwrap(),
            array![[2.0, 0.0], [0.0, 3.0]]
        );
    }

    #[test]
    fn sqrt_of_square_of_diagonal_is_idempotent() {
        let s = Array2::from_diag(&Array1::from(vec![0.5, 1.5, 3.0, 0.0]));
        let back = sym_matrix_sqrt(s.dot(&s).view()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn sqrt_rejects_asymmetric() {
        let c = array![[1.0, 0.5], [0.0, 1.0]];
        assert!(matches!(
            sym_matrix_sqrt(c.view()),
            Err(CbxError::Asymmetric { .. })
        ));
        let c = array![[1.0, 0.5, 0.0], [0.5, 1.0, 0.0]];
        assert!(matches!(sym_matrix_sqrt(c.view()), Err(CbxError::Shape(_))));
    }

    #[test]
    fn sqrt_clamps_slightly_negative_eigenvalues() {
        // rank one plus rounding-level negative perturbation
        let c: Array2<f64> = array![[1.0, 1.0], [1.0, 1.0 - 1e-17]];
        let s = sym_matrix_sqrt(c.view()).unwrap();
        assert!(s.iter().all(|v| v.is_finite()));
        let back = s.dot(&s);
        for (a, b) in back.iter().zip(c.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn sqrt_works_in_f32() {
        let c = array![[2.0f32, 0.5], [0.5, 1.0]];
        let s = sym_matrix_sqrt(c.view()).unwrap();
        let back = s.dot(&s);
        for (a, b) in back.iter().zip(c.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-5);
        }
    }
}

use cbx::{
    consensus_point, log_weights, polarized_consensus, sym_matrix_sqrt, weighted_covariance,
};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn ensemble(max_n: usize, max_d: usize) -> impl Strategy<Value = (Array2<f64>, Array1<f64>)> {
    (1..=max_n, 1..=max_d).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(-50.0..50.0f64, n * d)
                .prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap()),
            prop::collection::vec(0.0..100.0f64, n).prop_map(Array1::from),
        )
    })
}

proptest! {
    #[test]
    fn weights_form_a_simplex(values in prop::collection::vec(-1e8..1e8f64, 1..60), alpha in 0.0..1e12f64) {
        let lw = log_weights(Array1::from(values).view(), alpha).unwrap();
        prop_assert!(lw.weights.iter().all(|w| w.is_finite() && *w >= 0.0));
        prop_assert!((lw.weights.sum() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn weights_ignore_objective_shift((_, f) in ensemble(30, 1), alpha in 0.0..50.0f64, shift in -1e3..1e3f64) {
        let a = log_weights(f.view(), alpha).unwrap().weights;
        let b = log_weights((&f + shift).view(), alpha).unwrap().weights;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn consensus_is_translation_equivariant(
        (x, f) in ensemble(30, 4),
        alpha in 0.0..20.0f64,
        t in -10.0..10.0f64,
    ) {
        let c = consensus_point(x.view(), f.view(), alpha).unwrap().summary();
        let shifted = consensus_point((&x + t).view(), f.view(), alpha).unwrap().summary();
        for (a, b) in c.iter().zip(&shifted) {
            prop_assert!((a + t - b).abs() <= 1e-10 * (1.0 + a.abs() + t.abs()));
        }
    }

    #[test]
    fn consensus_stays_in_hull((x, f) in ensemble(40, 5), alpha in 0.0..1e6f64) {
        let c = consensus_point(x.view(), f.view(), alpha).unwrap().summary();
        for (k, ck) in c.iter().enumerate() {
            let col = x.column(k);
            let lo = col.fold(f64::INFINITY, |m, v| m.min(*v));
            let hi = col.fold(f64::NEG_INFINITY, |m, v| m.max(*v));
            prop_assert!(lo <= *ck && *ck <= hi);
        }
    }

    #[test]
    fn polarized_with_infinite_width_is_standard((x, f) in ensemble(40, 5), alpha in 0.0..100.0f64) {
        let standard = consensus_point(x.view(), f.view(), alpha).unwrap().summary();
        let polar = polarized_consensus(x.view(), f.view(), alpha, f64::INFINITY).unwrap();
        for i in 0..x.nrows() {
            for (a, b) in polar.point_for(i).iter().zip(&standard) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn polarized_points_stay_in_hull((x, f) in ensemble(20, 3), alpha in 0.0..10.0f64, width in 0.1..10.0f64) {
        let polar = polarized_consensus(x.view(), f.view(), alpha, width).unwrap();
        for i in 0..x.nrows() {
            for (k, ck) in polar.point_for(i).iter().enumerate() {
                let col = x.column(k);
                prop_assert!(col.iter().any(|v| v <= ck) && col.iter().any(|v| v >= ck));
            }
        }
    }

    #[test]
    fn covariance_sqrt_is_symmetric_psd((x, f) in ensemble(30, 6), alpha in 0.0..5.0f64) {
        let cons = consensus_point(x.view(), f.view(), alpha).unwrap();
        let c = weighted_covariance(x.view(), cons.weights.view(), cons.summary().view()).unwrap();
        prop_assert_eq!(&c, &c.t());
        let s = sym_matrix_sqrt(c.view()).unwrap();
        prop_assert_eq!(&s, &s.t());
        let scale = c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let res = (&s.dot(&s) - &c).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(res <= 1e-9 * scale, "residual {res} at scale {scale}");
        // v' S v >= 0 along every coordinate axis and the all-ones direction
        for k in 0..s.nrows() {
            prop_assert!(s[[k, k]] >= -1e-12 * scale.sqrt());
        }
        let ones = Array1::<f64>::ones(s.nrows());
        prop_assert!(ones.dot(&s.dot(&ones)) >= -1e-9 * scale.sqrt());
    }
}

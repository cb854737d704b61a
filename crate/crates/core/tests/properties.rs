//! Generative property tests for the numeric substrate.

use proptest::prelude::*;

use hsikit::linalg::{pairwise_sq_dists, psd_project, sym_eig};
use hsikit::matrix::Matrix;
use hsikit::metric::roc_auc;
use hsikit::tensor::{fold, mode_product, unfold, DenseTensor};

fn symmetric_matrix(n: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-10.0f64..10.0, n * (n + 1) / 2).prop_map(move |upper| {
        let mut m = Matrix::zeros(n, n);
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    })
}

fn tensor_and_mode() -> impl Strategy<Value = (DenseTensor, usize)> {
    (2usize..=4)
        .prop_flat_map(|order| proptest::collection::vec(1usize..=4, order))
        .prop_flat_map(|shape| {
            let len: usize = shape.iter().product();
            let order = shape.len();
            (
                Just(shape),
                proptest::collection::vec(-100.0f64..100.0, len),
                0..order,
            )
        })
        .prop_map(|(shape, data, mode)| (DenseTensor::new(shape, data).unwrap(), mode))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unfold_fold_round_trip_is_bit_exact((t, mode) in tensor_and_mode()) {
        let m = unfold(&t, mode).unwrap();
        let back = fold(&m, mode, t.shape()).unwrap();
        prop_assert_eq!(back.data(), t.data());
        // Unfolding preserves the Frobenius norm.
        prop_assert!((m.frobenius_norm() - t.frobenius_norm()).abs() < 1e-12);
    }

    #[test]
    fn mode_products_commute((t, _) in tensor_and_mode(), seed in 0u64..1000) {
        prop_assume!(t.order() >= 2);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::from_fn(2, t.shape()[0], |_, _| rng.gen_range(-1.0..1.0));
        let last = t.order() - 1;
        let b = Matrix::from_fn(2, t.shape()[last], |_, _| rng.gen_range(-1.0..1.0));
        let ab = mode_product(&mode_product(&t, &a, 0).unwrap(), &b, last).unwrap();
        let ba = mode_product(&mode_product(&t, &b, last).unwrap(), &a, 0).unwrap();
        let diff = ab.sub(&ba).frobenius_norm();
        prop_assert!(diff <= 1e-12 * ab.frobenius_norm().max(1.0));
    }

    #[test]
    fn sym_eig_reconstructs(m in (2usize..=6).prop_flat_map(symmetric_matrix)) {
        let pairs = sym_eig(&m).unwrap();
        let lam = Matrix::from_diag(&pairs.values);
        let recon = pairs.vectors.matmul(&lam).matmul(&pairs.vectors.transpose());
        let scale = m.frobenius_norm().max(1e-12);
        prop_assert!(recon.sub(&m).frobenius_norm() <= 1e-7 * scale);
        // Values sorted descending.
        for w in pairs.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn psd_projection_is_idempotent(m in (2usize..=5).prop_flat_map(symmetric_matrix)) {
        let once = psd_project(&m).unwrap();
        let twice = psd_project(&once).unwrap();
        let scale = once.frobenius_norm().max(1.0);
        prop_assert!(once.sub(&twice).frobenius_norm() <= 1e-12 * scale);
    }

    #[test]
    fn pairwise_distances_form_a_metric(
        data in proptest::collection::vec(-5.0f64..5.0, 3 * 6)
    ) {
        let x = Matrix::new(6, 3, data).unwrap();
        let d = pairwise_sq_dists(&x);
        for i in 0..6 {
            prop_assert_eq!(d[(i, i)], 0.0);
            for j in 0..6 {
                prop_assert!(d[(i, j)] >= 0.0);
                prop_assert_eq!(d[(i, j)], d[(j, i)]);
                for k in 0..6 {
                    prop_assert!(d[(i, k)].sqrt() <= d[(i, j)].sqrt() + d[(j, k)].sqrt() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform(
        scores in proptest::collection::vec(0.0f64..1.0, 12),
        flips in proptest::collection::vec(any::<bool>(), 12),
        scale in 0.1f64..10.0,
    ) {
        prop_assume!(flips.iter().any(|&b| b) && flips.iter().any(|&b| !b));
        let base = roc_auc(&scores, &flips).unwrap();
        let stretched: Vec<f64> = scores.iter().map(|s| scale * s + 3.0).collect();
        prop_assert_eq!(base, roc_auc(&stretched, &flips).unwrap());
        let exped: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
        prop_assert_eq!(base, roc_auc(&exped, &flips).unwrap());
    }
}

use haarapprox::linalg::{classical_gram_schmidt, gram_spectrum, mgs_orthonormalize, sym_eigenvalues, trace_power};
use haarapprox::sampler::{sample_haar_coupled, SeedSpec};
use haarapprox::{DenseMatrix, Matrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn int_matrix(n: usize, m: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-9i64..=9, n * m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mgs_matches_exact_classical(entries in int_matrix(8, 8)) {
        let y = Matrix::from_row_major(8, 8, entries.iter().map(|&v| v as f64).collect()).unwrap();
        let exact = DenseMatrix::from_row_major(
            8, 8, entries.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect()).unwrap();
        let Ok((w, sq)) = classical_gram_schmidt(&exact) else { return Ok(()) };
        if sq.iter().any(|s| s.to_f64().unwrap() < 1e-6) {
            return Ok(());
        }
        let gs = mgs_orthonormalize(&y).unwrap();
        for j in 0..8 {
            let norm = sq[j].to_f64().unwrap().sqrt();
            prop_assert!((gs.w_norms[j] - norm).abs() <= 1e-10 * (1.0 + norm));
            for i in 0..8 {
                let expect = w[(i, j)].to_f64().unwrap() / norm;
                prop_assert!((gs.q[(i, j)] - expect).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn gram_spectrum_is_psd_with_frobenius_trace(p in 1usize..7, q in 1usize..7, seed in any::<u64>()) {
        let x = haarapprox::sampler::gaussian_matrix(p, q, SeedSpec::new(seed, 0)).unwrap();
        let s = gram_spectrum(&x).unwrap();
        prop_assert_eq!(s.dim(), q);
        prop_assert!(s.eigenvalues().iter().all(|&l| l >= 0.0));
        let fro2 = x.frobenius_norm().powi(2);
        prop_assert!((s.trace() - fro2).abs() <= 1e-10 * (1.0 + fro2));
        if p < q {
            let zeros = s.eigenvalues().iter().filter(|&&l| l <= 1e-9 * fro2).count();
            prop_assert!(zeros >= q - p);
        }
    }

    #[test]
    fn trace_powers_invariant_under_rotation(n in 2usize..9, seed in any::<u64>(), k in 1u32..5) {
        let x = haarapprox::sampler::gaussian_matrix(n, n, SeedSpec::new(seed, 1)).unwrap();
        let a = x.transpose().matmul(&x).unwrap();
        let g = sample_haar_coupled(n, SeedSpec::new(seed, 2)).unwrap().gamma();
        let rotated = g.transpose().matmul(&a).unwrap().matmul(&g).unwrap();
        let t0 = trace_power(&a, k).unwrap();
        let t1 = trace_power(&rotated, k).unwrap();
        prop_assert!((t0 - t1).abs() <= 1e-9 * t0.abs().max(1.0));
        let direct = sym_eigenvalues(&a).unwrap().power_sum(k as i32);
        prop_assert!((t0 - direct).abs() <= 1e-9 * t0.abs().max(1.0));
    }
}

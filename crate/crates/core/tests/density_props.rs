use haarapprox::density::{
    log_Kn_asymptotic, log_Kn_exact, log_density_ratio, log_gaussian_density, log_scaled_block_density, lognormal_params,
    BlockSpec,
};
use haarapprox::sampler::{gaussian_matrix, SeedSpec};
use proptest::prelude::*;

fn normalization(n: usize, p: usize, reps: u64) -> (f64, f64) {
    let spec = BlockSpec::new(n, p, p).unwrap();
    let vals: Vec<f64> = (0..reps)
        .map(|r| {
            let x = gaussian_matrix(p, p, SeedSpec::derive(8, "normalization", n as u64, r)).unwrap();
            log_density_ratio(&x, &spec).unwrap().log_ratio().to_float().exp()
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / reps as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    (mean, (var / reps as f64).sqrt())
}

#[test]
fn density_ratio_has_unit_mean_at_larger_block() {
    let (mean, se) = normalization(400, 10, 20_000);
    assert!((mean - 1.0).abs() <= 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn kn_gap_halves_per_fourfold_n() {
    let gap = |n: usize| {
        let spec = BlockSpec::from_scaling(n, 1.0, 1.0).unwrap();
        (log_Kn_exact::<f64>(&spec).unwrap() - log_Kn_asymptotic(1.0, 1.0, &spec)).abs()
    };
    let gaps: Vec<f64> = [100, 400, 1600].iter().map(|&n| gap(n)).collect();
    assert!(gaps[0] < 0.35);
    for w in gaps.windows(2) {
        let r = w[0] / w[1];
        assert!((1.7..=2.3).contains(&r), "{gaps:?}");
    }
}

#[test]
fn lognormal_location_sums_kn_exponent() {
    // E log L_n ≈ a_n, so log K_n + a_n should approach the limit mean of log K_n L_n
    let spec = BlockSpec::from_scaling(6400, 1.0, 1.0).unwrap();
    let lp = lognormal_params(1.0, 1.0, &spec);
    let total = log_Kn_asymptotic(1.0, 1.0, &spec) + lp.a_n;
    assert!((total - (-0.25 - 7.0 / 24.0 + 5.0 / 12.0)).abs() < 1e-12);
    assert!((total - lp.limit_mean_log).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_paths_agree(n in 10usize..300, p in 1usize..6, q in 1usize..6, master in any::<u64>()) {
        prop_assume!(p + q < n);
        let spec = BlockSpec::new(n, p, q).unwrap();
        let x = gaussian_matrix(p, q, SeedSpec::new(master, 5)).unwrap();
        let ratio = log_density_ratio(&x, &spec).unwrap();
        let direct = log_scaled_block_density(&x, &spec).unwrap();
        match (ratio.log_ratio().finite(), direct.finite()) {
            (Some(a), Some(b)) => {
                let d = b - log_gaussian_density(&x);
                prop_assert!((a - d).abs() <= 1e-8 * (1.0 + d.abs()), "{} vs {}", a, d);
            }
            (None, None) => prop_assert!(ratio.boundary_hit),
            other => prop_assert!(false, "paths disagree on the boundary: {:?}", other),
        }
    }

    #[test]
    fn kn_is_symmetric_and_nonpositive(n in 4usize..5000, p in 1usize..40, q in 1usize..40) {
        prop_assume!(p + q <= n);
        let a = log_Kn_exact::<f64>(&BlockSpec::new(n, p, q).unwrap()).unwrap();
        let b = log_Kn_exact::<f64>(&BlockSpec::new(n, q, p).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        prop_assert!(a < 0.0);
    }

    #[test]
    fn lognormal_mean_is_minus_two_sigma_squared(x in 0.01f64..5.0, y in 0.01f64..5.0) {
        let spec = BlockSpec::new(100, 1, 1).unwrap();
        let lp = lognormal_params(x, y, &spec);
        prop_assert!((lp.limit_mean_log + 2.0 * lp.sigma * lp.sigma).abs() <= 1e-12 * (1.0 + lp.limit_mean_log.abs()));
        prop_assert!(lp.sigma > 0.0 && lp.limit_sd_log == lp.sigma);
    }
}

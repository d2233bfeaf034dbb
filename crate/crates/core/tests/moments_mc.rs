use haarapprox::moments::{
    cov_trace12_asymptotic, expected_trace_pow_asymptotic, expected_trace_pow_exact, mc_trace_moments, trace_pow_lln_limit,
    var_trace2_asymptotic,
};
use haarapprox::sampler::SeedSpec;
use proptest::prelude::*;

#[test]
fn variance_and_covariance_near_leading_terms() {
    let m = mc_trace_moments(30, 30, 2, 5000, SeedSpec::new(303, 0)).unwrap();
    let var_ratio = m.var_trace2.value / var_trace2_asymptotic(30, 30);
    let cov_ratio = m.cov_trace12.value / cov_trace12_asymptotic(30, 30);
    assert!((var_ratio - 1.0).abs() <= 0.2, "variance ratio {var_ratio}");
    assert!((cov_ratio - 1.0).abs() <= 0.2, "covariance ratio {cov_ratio}");
}

#[test]
fn normalized_traces_follow_catalan_limits() {
    let q = 200usize;
    let m = mc_trace_moments(q, q, 3, 100, SeedSpec::new(404, 0)).unwrap();
    for k in 1..=3u32 {
        let limit = trace_pow_lln_limit(1.0, k).unwrap();
        let scale = (q as f64).powi(k as i32 + 1);
        let within = m
            .samples
            .iter()
            .filter(|s| (s[k as usize - 1] / scale / limit - 1.0).abs() <= 0.05)
            .count();
        assert!(within * 10 >= 9 * m.samples.len(), "k={k}: {within}/{}", m.samples.len());
    }
    let k3 = m.reports[2].mc_mean / (q as f64).powi(4);
    assert!((k3 / 5.0 - 1.0).abs() <= 0.05, "{k3}");
}

proptest! {
    #[test]
    fn first_moment_forms_agree(p in 1usize..500, q in 1usize..500) {
        prop_assert_eq!(expected_trace_pow_asymptotic(p, q, 1).unwrap(), expected_trace_pow_exact::<f64>(p, q, 1).unwrap());
    }

    #[test]
    fn asymptotic_sum_is_symmetric_up_to_transpose(p in 1usize..60, q in 1usize..60, k in 1u32..9) {
        // tr((X'X)^k) = tr((XX')^k), and the leading sum is symmetric in p and q
        let a = expected_trace_pow_asymptotic(p, q, k).unwrap();
        let b = expected_trace_pow_asymptotic(q, p, k).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn lln_limit_matches_scaled_leading_sum(q in 1usize..200, k in 1u32..9) {
        let eta = 1.0;
        let lead = expected_trace_pow_asymptotic(q, q, k).unwrap() / (q as f64).powi(k as i32 + 1);
        prop_assert!((lead - trace_pow_lln_limit(eta, k).unwrap()).abs() <= 1e-9 * lead);
    }
}

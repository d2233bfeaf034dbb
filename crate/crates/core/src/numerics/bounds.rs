use statrs::function::erf::erfc;

use crate::error::{domain, precondition, Result};
use crate::scalar::{Extended, Real};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_94;

/// Standard normal tail `P(ξ > x)` between its Mills-ratio bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSandwich {
    pub x: f64,
    pub lower: f64,
    pub exact: f64,
    pub upper: f64,
}

impl TailSandwich {
    pub fn holds(&self) -> bool {
        0.0 <= self.lower && self.lower <= self.exact && self.exact <= self.upper
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `x/(1+x²) φ(x) <= P(ξ > x) <= φ(x)/x` for `x > 0`, with the exact tail
/// from the complementary error function.
pub fn normal_tail_sandwich(x: f64) -> Result<TailSandwich> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(
            "normal_tail_sandwich",
            format!("x must be positive, got {x}"),
        ));
    }
    let density = INV_SQRT_2PI * (-0.5 * x * x).exp();
    Ok(TailSandwich {
        x,
        lower: density * x / (1.0 + x * x),
        exact: 0.5 * erfc(x / std::f64::consts::SQRT_2),
        upper: density / x,
    })
}

/// Cramér rate function of a single χ²(1) variable: `(x - 1 - ln x)/2` for
/// `x > 0`, `+∞` otherwise.
pub fn chi2_rate<T: Real>(x: T) -> Extended<T> {
    if x > T::zero() {
        Extended::Finite((x - T::one() - x.ln()) * T::lit(0.5))
    } else {
        Extended::PosInf
    }
}

/// `6 exp(-m⁴x²/(48n³))`, the bound on `P(|S_n/S_m - n/m| >= x)` for sums of
/// squared standard normals. The raw value is returned even when it exceeds 1.
pub fn chi2_ratio_tail_bound(n: u64, m: u64, x: f64) -> Result<f64> {
    const F: &str = "chi2_ratio_tail_bound";
    if m == 0 || 2 * m > n {
        return Err(precondition(
            F,
            format!("need 1 <= m <= n/2, got n={n}, m={m}"),
        ));
    }
    let (nf, mf) = (n as f64, m as f64);
    if !(x > 0.0) || x > nf / mf {
        return Err(precondition(
            F,
            format!("need 0 < x <= n/m = {}, got {x}", nf / mf),
        ));
    }
    Ok(6.0 * (-(mf.powi(4) * x * x) / (48.0 * nf.powi(3))).exp())
}

/// Evaluated tail bound on `P(ε_n(m) >= rs + 2t)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CouplingBound {
    pub threshold: f64,
    pub bound: f64,
    /// `4m e^{-nr²/16}`
    pub norm_term: f64,
    /// `3mn s⁻¹ e^{-s²/2}`
    pub gaussian_term: f64,
    /// `3mn t⁻¹ (1 + t²/(3(m+√n)))^{-n/2}`
    pub projection_term: f64,
}

/// Tail bound for the Gram–Schmidt coupling error over the first `m` columns,
/// valid for `r ∈ (0, 1/4)`, `s, t > 0` and `m <= rn/2`. Each summand is
/// formed in log space.
pub fn coupling_tail_bound(n: u64, m: u64, r: f64, s: f64, t: f64) -> Result<CouplingBound> {
    const F: &str = "coupling_tail_bound";
    if n < 2 || m == 0 {
        return Err(precondition(
            F,
            format!("need n >= 2 and m >= 1, got n={n}, m={m}"),
        ));
    }
    if !(r > 0.0 && r < 0.25) {
        return Err(precondition(F, format!("r must lie in (0, 1/4), got {r}")));
    }
    if !(s > 0.0) || !(t > 0.0) {
        return Err(precondition(
            F,
            format!("s and t must be positive, got s={s}, t={t}"),
        ));
    }
    let (nf, mf) = (n as f64, m as f64);
    if mf > 0.5 * r * nf {
        return Err(precondition(
            F,
            format!("need m <= rn/2 = {}, got {m}", 0.5 * r * nf),
        ));
    }
    let norm_term = (4.0f64.ln() + mf.ln() - nf * r * r / 16.0).exp();
    let lead = 3.0f64.ln() + mf.ln() + nf.ln();
    let gaussian_term = (lead - s.ln() - 0.5 * s * s).exp();
    let projection_term = if t.is_infinite() {
        0.0
    } else {
        let base = (t * t / (3.0 * (mf + nf.sqrt()))).ln_1p();
        (lead - t.ln() - 0.5 * nf * base).exp()
    };
    Ok(CouplingBound {
        threshold: r * s + 2.0 * t,
        bound: norm_term + gaussian_term + projection_term,
        norm_term,
        gaussian_term,
        projection_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // P(N(0,1) > x) at 50 digits.
    const TAIL: [(f64, f64); 7] = [
        (0.01, 0.496_010_643_685_368_396_3),
        (0.5, 0.308_537_538_725_986_896_36),
        (1.0, 0.158_655_253_931_457_051_41),
        (2.0, 0.022_750_131_948_179_207_2),
        (3.0, 0.001_349_898_031_630_094_526_7),
        (5.0, 2.866_515_718_791_939_116_7e-7),
        (8.0, 6.220_960_574_271_784_123_5e-16),
    ];

    #[test]
    fn tail_exact_matches_reference() {
        for &(x, want) in TAIL.iter() {
            let got = normal_tail_sandwich(x).unwrap().exact;
            assert!(
                ((got - want) / want).abs() <= 1e-10,
                "x={x}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn tail_sandwich_at_one() {
        let s = normal_tail_sandwich(1.0).unwrap();
        assert!((s.lower - 0.120_985).abs() < 1e-6);
        assert!((s.exact - 0.158_655).abs() < 1e-6);
        assert!((s.upper - 0.241_971).abs() < 1e-6);
        assert!(s.holds());
    }

    #[test]
    fn tail_sandwich_log_grid() {
        let mut prev_gap = f64::INFINITY;
        for i in 0..100 {
            let x = 0.01 * (800f64).powf(i as f64 / 99.0);
            let s = normal_tail_sandwich(x).unwrap();
            assert!(s.holds(), "{s:?}");
            // upper/lower = (1 + x²)/x², decreasing toward 1
            let gap = s.upper / s.lower;
            assert!((gap - (1.0 + x * x) / (x * x)).abs() < 1e-9 * gap);
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(normal_tail_sandwich(0.0).is_err());
        assert!(normal_tail_sandwich(-2.0).is_err());
    }

    #[test]
    fn rate_function_values() {
        assert_eq!(chi2_rate(1.0f64), Extended::Finite(0.0));
        let want = (4f64.ln() - 1.0) / 4.0;
        let got = chi2_rate(0.5f64).finite().unwrap();
        assert!((got - want).abs() < 1e-15);
        assert!((got - 0.096_573_6).abs() < 1e-7);
        assert_eq!(chi2_rate(-1.0f64), Extended::PosInf);
        assert_eq!(chi2_rate(0.0f64), Extended::PosInf);
    }

    #[test]
    fn rate_function_shape() {
        let h = 1e-3;
        let mut prev = f64::INFINITY;
        for i in 1..2000 {
            let x = i as f64 * 2.5e-3;
            let v = chi2_rate(x).finite().unwrap();
            let second = chi2_rate(x + h).finite().unwrap() - 2.0 * v
                + chi2_rate((x - h).max(1e-12)).finite().unwrap();
            if x > h {
                assert!(second > 0.0, "not convex at {x}");
            }
            if x < 1.0 {
                assert!(v <= prev);
            } else {
                assert!(v >= 0.0);
            }
            if (x - 1.0).abs() > 1e-9 {
                assert!(v > 0.0, "minimum is not unique at {x}");
            }
            prev = v;
        }
    }

    #[test]
    fn chi2_ratio_bound_examples() {
        let b = chi2_ratio_tail_bound(1000, 500, 2.0).unwrap();
        let expo: f64 = 500f64.powi(4) * 4.0 / (48.0 * 1e9);
        assert!((expo - 5.208_333_333).abs() < 1e-8);
        assert!((b - 6.0 * (-expo).exp()).abs() < 1e-15);
        assert!((b - 0.032_83).abs() < 1e-5);

        let vacuous = chi2_ratio_tail_bound(1000, 100, 1.0).unwrap();
        assert!((vacuous - 6.0 * (-1.0f64 / 480.0).exp()).abs() < 1e-14);
        assert!(vacuous > 5.98);

        assert!(chi2_ratio_tail_bound(1000, 600, 1.0).is_err());
        assert!(chi2_ratio_tail_bound(1000, 500, 2.5).is_err());
        assert!(chi2_ratio_tail_bound(1000, 0, 1.0).is_err());
        assert!(chi2_ratio_tail_bound(1000, 100, 0.0).is_err());
    }

    #[test]
    fn coupling_bound_example() {
        let b = coupling_tail_bound(10_000, 100, 0.2, 6.0, 3.0).unwrap();
        assert!((b.threshold - 7.2).abs() < 1e-12);
        // direct evaluation: 3e6 · e^{-18}/6 dominates
        let direct = 4.0 * 100.0 * (-25.0f64).exp()
            + 3e6 * ((-18.0f64).exp() / 6.0 + (1.0 + 9.0 / 600.0f64).powf(-5000.0) / 3.0);
        assert!((b.bound - direct).abs() < 1e-12 * direct);
        assert!((b.bound - 7.6e-3).abs() < 0.05e-3, "{}", b.bound);
    }

    #[test]
    fn coupling_bound_projection_term_vanishes() {
        let mut prev = f64::INFINITY;
        for t in [1.0, 2.0, 4.0, 8.0, 16.0, f64::INFINITY] {
            let b = coupling_tail_bound(10_000, 100, 0.2, 6.0, t).unwrap();
            assert!(b.projection_term < prev || b.projection_term == 0.0);
            prev = b.projection_term;
        }
        assert_eq!(prev, 0.0);
    }

    #[test]
    fn coupling_bound_preconditions() {
        assert!(coupling_tail_bound(10_000, 1001, 0.2, 6.0, 3.0).is_err());
        assert!(coupling_tail_bound(10_000, 100, 0.25, 6.0, 3.0).is_err());
        assert!(coupling_tail_bound(10_000, 100, 0.2, 0.0, 3.0).is_err());
        assert!(coupling_tail_bound(10_000, 100, 0.2, 6.0, -1.0).is_err());
    }
}

use crate::error::{domain, Result};
use crate::scalar::Real;

// Lanczos approximation, g = 7, nine terms (Godfrey's coefficients).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

// B_{2k} / (2k (2k - 1)) for k = 1..=7.
const STIRLING_COEF: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;

/// Natural logarithm of the gamma function for `x > 0`.
///
/// Uses the Lanczos sum on `[0.5, 10)`, the Stirling series (seven
/// Bernoulli terms, truncation below `1e-16` relative) for `x >= 10`, and the
/// reflection formula below `0.5`.
pub fn log_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(
            "log_gamma",
            format!("argument must be positive and finite, got {x:?}"),
        ));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - log_gamma_unchecked(T::one() - x);
    }
    if x >= T::lit(10.0) {
        let inv = x.recip();
        let inv2 = inv * inv;
        let mut series = T::zero();
        let mut pow = inv;
        for &c in STIRLING_COEF.iter() {
            series += T::lit(c) * pow;
            pow *= inv2;
        }
        return (x - half) * x.ln() - x + T::lit(LN_SQRT_2PI) + series;
    }
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += T::lit(c) / (z + T::from_usize_lossy(i));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    T::lit(LN_SQRT_2PI) + (z + half) * t.ln() - t + acc.ln()
}

/// A value with the two-sided bound it is claimed to satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBounds {
    pub lower: f64,
    pub ratio: f64,
    pub upper: f64,
}

impl RatioBounds {
    pub fn holds_strictly(&self) -> bool {
        self.lower < self.ratio && self.ratio < self.upper
    }
}

/// Both gamma-ratio sandwiches at a given `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRatioBounds {
    pub n: u64,
    /// `Γ(n + 1/2) / (√n Γ(n))` inside `(1 - 1/(6n), 1)`.
    pub half_shift: RatioBounds,
    /// `Γ((n + 1)/2) / (√(n/2) Γ(n/2))` inside `(1 - 3/(5n), 1 + 3/(5n))`.
    pub half_argument: RatioBounds,
}

pub fn gamma_ratio_bounds(n: u64) -> Result<GammaRatioBounds> {
    if n == 0 {
        return Err(domain("gamma_ratio_bounds", "n must be at least 1"));
    }
    let nf = n as f64;
    let lg = log_gamma_unchecked::<f64>;
    let shift = (lg(nf + 0.5) - lg(nf) - 0.5 * nf.ln()).exp();
    let halved = (lg((nf + 1.0) / 2.0) - lg(nf / 2.0) - 0.5 * (nf / 2.0).ln()).exp();
    Ok(GammaRatioBounds {
        n,
        half_shift: RatioBounds {
            lower: 1.0 - 1.0 / (6.0 * nf),
            ratio: shift,
            upper: 1.0,
        },
        half_argument: RatioBounds {
            lower: 1.0 - 3.0 / (5.0 * nf),
            ratio: halved,
            upper: 1.0 + 3.0 / (5.0 * nf),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // 50-digit reference evaluations, rounded to 20 significant digits.
    const GOLDEN: [(f64, f64); 20] = [
        (0.5, 0.572_364_942_924_700_087_07),
        (0.75, 0.203_280_951_431_295_371_48),
        (1.25, -0.098_271_836_421_813_161_464),
        (1.5, -0.120_782_237_635_245_222_35),
        (2.5, 0.284_682_870_472_919_159_63),
        (3.0, 0.693_147_180_559_945_309_42),
        (4.2, 2.048_555_636_960_589_809),
        (5.5, 3.957_813_967_618_716_293_9),
        (7.125, 6.814_541_238_336_995_709_3),
        (9.75, 12.242_204_940_050_762_559),
        (10.5, 13.940_625_219_403_763_633),
        (12.5, 18.734_347_511_936_445_702),
        (20.0, 39.339_884_187_199_494_036),
        (33.3, 82.603_723_581_654_952_928),
        (50.5, 146.519_255_490_720_627_22),
        (100.0, 359.134_205_369_575_398_78),
        (1000.25, 5_906.947_268_271_117_177),
        (12345.5, 103_958.242_965_123_229_13),
        (1e6, 12_815_504.569_147_611_66),
        (1e7, 151_180_949.369_473_913_94),
    ];

    #[test]
    fn golden_values() {
        for &(x, want) in GOLDEN.iter() {
            let got = log_gamma(x).unwrap();
            let rel = ((got - want) / want).abs();
            assert!(rel <= 1e-12, "x={x}: got {got}, want {want}, rel {rel:e}");
        }
    }

    #[test]
    fn trivial_points() {
        assert!(log_gamma(1.0f64).unwrap().abs() < 1e-15);
        assert!(log_gamma(2.0f64).unwrap().abs() < 1e-15);
        let half = 0.5 * std::f64::consts::PI.ln();
        assert!((log_gamma(0.5f64).unwrap() - half).abs() < 1e-15);
    }

    #[test]
    fn single_precision() {
        let got = log_gamma(10.5f32).unwrap();
        assert!((got - 13.940_625).abs() / 13.94 < 1e-6);
    }

    #[test]
    fn recurrence_holds_across_branch_switch() {
        for i in 0..200 {
            let x = 0.05 + 0.1 * i as f64;
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + x.ln();
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()), "x={x}");
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(log_gamma(0.0f64).is_err());
        assert!(log_gamma(-1.5f64).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn gamma_ratio_small_n() {
        let b = gamma_ratio_bounds(1).unwrap();
        assert!((b.half_shift.ratio - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((b.half_shift.lower - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(b.half_shift.upper, 1.0);

        // Γ(2.5) = (3/4)√π, so the ratio is (3/4)√π / √2.
        let b = gamma_ratio_bounds(2).unwrap();
        let want = 0.75 * std::f64::consts::PI.sqrt() / 2f64.sqrt();
        assert!((b.half_shift.ratio - want).abs() < 1e-14);
        assert!((b.half_shift.ratio - 0.939_986).abs() < 1e-6);
        assert!((b.half_shift.lower - 0.916_667).abs() < 1e-6);

        let b = gamma_ratio_bounds(1000).unwrap();
        assert!(b.half_shift.ratio > 0.999_833 && b.half_shift.ratio < 1.0);
    }

    #[test]
    fn gamma_ratio_sweep() {
        for n in 1..=1000 {
            let b = gamma_ratio_bounds(n).unwrap();
            assert!(
                b.half_shift.holds_strictly(),
                "part (i) fails at n={n}: {b:?}"
            );
            assert!(
                b.half_argument.holds_strictly(),
                "part (ii) fails at n={n}: {b:?}"
            );
        }
        assert!(gamma_ratio_bounds(0).is_err());
    }
}

use crate::error::{precondition, Result};

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_c^d ∫_a^b f(s, t) ds dt` by nested adaptive Simpson.
pub fn integrate_rectangle<F: Fn(f64, f64) -> f64>(
    f: F,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    tol: f64,
) -> f64 {
    let inner_tol = tol / (d - c).abs().max(1.0) * 0.1;
    adaptive_simpson(
        |t| adaptive_simpson(|s| f(s, t), a, b, inner_tol),
        c,
        d,
        tol,
    )
}

/// Gauss–Hermite rule normalized for a standard normal weight.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `order`-point rule by Newton iteration on the orthonormal
    /// Hermite recurrence, then rescales nodes by √2 and weights by 1/√π.
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(precondition(
                "GaussHermite::new",
                "order must be at least 2",
            ));
        }
        let n = order;
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut z = 0.0f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => {
                    let s = (2 * n + 1) as f64;
                    s.sqrt() - 1.855_75 * s.powf(-1.0 / 6.0)
                }
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        let norm = std::f64::consts::PI.sqrt();
        Ok(Self {
            nodes: x.iter().map(|v| v * std::f64::consts::SQRT_2).collect(),
            weights: w.iter().map(|v| v / norm).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_k f(x_k) ≈ E f(ξ)` for standard normal `ξ`.
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

pub fn gauss_hermite_expectation<F: Fn(f64) -> f64>(f: F, order: usize) -> Result<f64> {
    Ok(GaussHermite::new(order)?.expectation(f))
}

/// Integral-plus-correction approximation of a lattice double sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleSumApprox {
    pub approx: f64,
    pub error_budget: f64,
}

/// Approximates `Σ_{i=i1}^{i2} Σ_{j=j1}^{j2} f(i/n, j/n)` by
/// `n² ∫∫ f - (1/2n) Σ f_s - (1/2n) Σ f_t`, the integral running over
/// `[i1/n, (i2+1)/n] × [j1/n, (j2+1)/n]`.
///
/// `second_derivative_bound` must dominate `|f_ss|`, `|f_st|` and `|f_tt|` on
/// that rectangle. The returned budget is `(i2-i1)(j2-j1) M / n²`. A per-cell
/// Taylor estimate gives the sharper `(7/12) M / n²` per lattice cell; the
/// looser stated budget is what callers compare against.
#[allow(clippy::too_many_arguments)]
pub fn euler_maclaurin_double_sum<F, Fs, Ft>(
    f: F,
    f_s: Fs,
    f_t: Ft,
    n: u64,
    (i1, i2): (i64, i64),
    (j1, j2): (i64, i64),
    second_derivative_bound: f64,
) -> Result<DoubleSumApprox>
where
    F: Fn(f64, f64) -> f64,
    Fs: Fn(f64, f64) -> f64,
    Ft: Fn(f64, f64) -> f64,
{
    if n == 0 || i1 >= i2 || j1 >= j2 {
        return Err(precondition(
            "euler_maclaurin_double_sum",
            format!("need n >= 1, i1 < i2, j1 < j2; got n={n}, i=({i1},{i2}), j=({j1},{j2})"),
        ));
    }
    let nf = n as f64;
    let integral = integrate_rectangle(
        &f,
        (i1 as f64 / nf, (i2 + 1) as f64 / nf),
        (j1 as f64 / nf, (j2 + 1) as f64 / nf),
        1e-13,
    );
    let mut corr = 0.0;
    for j in j1..=j2 {
        for i in i1..=i2 {
            let (s, t) = (i as f64 / nf, j as f64 / nf);
            corr += f_s(s, t) + f_t(s, t);
        }
    }
    Ok(DoubleSumApprox {
        approx: nf * nf * integral - corr / (2.0 * nf),
        error_budget: ((i2 - i1) * (j2 - j1)) as f64 * second_derivative_bound / (nf * nf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomials_and_exp() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-14);
        assert!((v - 4.0).abs() < 1e-13);
        let v = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-14);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn rectangle_integral() {
        // ∫_0^v ∫_0^u (s + t) ds dt = (u²v + uv²)/2
        let (u, v) = (0.3, 0.7);
        let got = integrate_rectangle(|s, t| s + t, (0.0, u), (0.0, v), 1e-14);
        assert!((got - (u * u * v + u * v * v) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_normalization_and_moments() {
        for order in [2, 5, 20, 60, 120] {
            let gh = GaussHermite::new(order).unwrap();
            assert!(
                (gh.expectation(|_| 1.0) - 1.0).abs() < 1e-13,
                "order {order}"
            );
            assert!(
                (gh.expectation(|x| x * x) - 1.0).abs() < 1e-12,
                "order {order}"
            );
            assert!(gh.expectation(|x| x).abs() < 1e-13);
        }
        let gh = GaussHermite::new(10).unwrap();
        assert!((gh.expectation(|x| x.powi(4)) - 3.0).abs() < 1e-12);
        assert!((gh.expectation(|x| x.powi(8)) - 105.0).abs() < 1e-9);
        assert!(GaussHermite::new(1).is_err());
    }

    #[test]
    fn hermite_lognormal_mean() {
        let sigma = 0.25;
        let v =
            gauss_hermite_expectation(|x| (-sigma * sigma / 2.0 + sigma * x).exp(), 60).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        let sigma = 2.0;
        let v =
            gauss_hermite_expectation(|x| (-sigma * sigma / 2.0 + sigma * x).exp(), 60).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    fn direct_sum<F: Fn(f64, f64) -> f64>(f: F, n: u64, i: (i64, i64), j: (i64, i64)) -> f64 {
        let nf = n as f64;
        let mut acc = 0.0;
        for jj in j.0..=j.1 {
            for ii in i.0..=i.1 {
                acc += f(ii as f64 / nf, jj as f64 / nf);
            }
        }
        acc
    }

    #[test]
    fn constant_and_linear_are_exact() {
        let r =
            euler_maclaurin_double_sum(|_, _| 2.5, |_, _| 0.0, |_, _| 0.0, 50, (3, 9), (0, 4), 0.0)
                .unwrap();
        assert!((r.approx - 2.5 * 35.0).abs() < 1e-9);
        assert_eq!(r.error_budget, 0.0);

        let f = |s: f64, t: f64| 1.0 + 3.0 * s - 2.0 * t;
        let r = euler_maclaurin_double_sum(f, |_, _| 3.0, |_, _| -2.0, 40, (2, 11), (5, 8), 0.0)
            .unwrap();
        let want = direct_sum(f, 40, (2, 11), (5, 8));
        assert!((r.approx - want).abs() < 1e-9, "{} vs {want}", r.approx);
    }

    #[test]
    fn log_family_within_budget() {
        let f = |s: f64, t: f64| (1.0 - 2.0 * s - t).ln();
        let fs = |s: f64, t: f64| -2.0 / (1.0 - 2.0 * s - t);
        let ft = |s: f64, t: f64| -1.0 / (1.0 - 2.0 * s - t);
        for (n, k, q) in [(100u64, 5i64, 10i64), (400, 10, 20), (400, 7, 33)] {
            let nf = n as f64;
            // largest second derivative, 4/(1-2s-t)², at the far corner
            let far = 1.0 - 2.0 * (k + 1) as f64 / nf - q as f64 / nf;
            let m = 4.0 / (far * far);
            let r = euler_maclaurin_double_sum(f, fs, ft, n, (1, k), (0, q - 1), m).unwrap();
            let want = direct_sum(f, n, (1, k), (0, q - 1));
            assert!(
                (r.approx - want).abs() <= r.error_budget,
                "n={n}: |{} - {want}| > {}",
                r.approx,
                r.error_budget
            );
        }
    }

    #[test]
    fn double_sum_rejects_empty_ranges() {
        let z = |_: f64, _: f64| 0.0;
        assert!(euler_maclaurin_double_sum(z, z, z, 10, (3, 3), (0, 2), 1.0).is_err());
        assert!(euler_maclaurin_double_sum(z, z, z, 10, (0, 2), (4, 1), 1.0).is_err());
    }
}

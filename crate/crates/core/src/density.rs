//! Exact and asymptotic block densities of a Haar orthogonal matrix and the
//! `K_n L_n` factorization of the density ratio `f_n / g_n`.
//!
//! `f` is the density of the upper-left `p x q` block `Z` of a Haar matrix on
//! `O(n)`, `f_n` the density of `√n Z`, and `g_n` the density of a `p x q`
//! matrix of i.i.d. standard normals. All values are kept in log-space.

use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, Error, Result};
use crate::linalg::{gram_spectrum, DenseMatrix, SymSpectrum};
use crate::numerics::{adaptive_simpson, log_gamma, GaussHermite};
use crate::scalar::{Extended, Real};

/// Ambient dimension `n` and block shape `p x q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    /// Scaling parameters; `p / √n` and `q / √n` unless built by [`BlockSpec::from_scaling`].
    pub x: f64,
    pub y: f64,
}

impl BlockSpec {
    pub fn new(n: usize, p: usize, q: usize) -> Result<Self> {
        let root = (n as f64).sqrt();
        Self::checked(n, p, q, p as f64 / root, q as f64 / root)
    }

    /// `p = ⌊x√n⌋`, `q = ⌊y√n⌋`.
    pub fn from_scaling(n: usize, x: f64, y: f64) -> Result<Self> {
        if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
            return Err(domain(
                "BlockSpec::from_scaling",
                format!("x, y must be finite and nonnegative, got ({x}, {y})"),
            ));
        }
        let root = (n as f64).sqrt();
        Self::checked(
            n,
            (x * root).floor() as usize,
            (y * root).floor() as usize,
            x,
            y,
        )
    }

    fn checked(n: usize, p: usize, q: usize, x: f64, y: f64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(domain(
                "BlockSpec",
                format!("p and q must be positive, got p={p}, q={q}"),
            ));
        }
        if p + q > n {
            return Err(domain(
                "BlockSpec",
                format!("need p + q <= n, got p={p}, q={q}, n={n}"),
            ));
        }
        Ok(Self { n, p, q, x, y })
    }

    /// Same `n` with the roles of `p` and `q` exchanged.
    pub fn transposed(&self) -> Self {
        Self {
            n: self.n,
            p: self.q,
            q: self.p,
            x: self.y,
            y: self.x,
        }
    }

    fn check_shape<T>(&self, z: &DenseMatrix<T>) -> Result<()>
    where
        T: Clone,
    {
        if z.rows() != self.p || z.cols() != self.q {
            return Err(Error::Shape {
                expected: format!("{}x{}", self.p, self.q),
                got: format!("{}x{}", z.rows(), z.cols()),
            });
        }
        Ok(())
    }
}

/// `log ω(r, s)` for the Wishart constant
/// `1/ω(r,s) = π^{s(s-1)/4} 2^{rs/2} Π_{j=1}^s Γ((r-j+1)/2)`.
pub fn log_wishart_const<T: Real>(r: T, s: usize) -> Result<T> {
    if s == 0 {
        return Err(domain("log_wishart_const", "s must be at least 1"));
    }
    let sf = T::from_usize_lossy(s);
    if !(r > sf - T::one()) {
        return Err(domain(
            "log_wishart_const",
            format!("need r > s - 1, got r={r:?}, s={s}"),
        ));
    }
    let half = T::lit(0.5);
    let mut acc = sf * (sf - T::one()) / T::lit(4.0) * T::lit(std::f64::consts::PI).ln()
        + r * sf * half * T::lit(std::f64::consts::LN_2);
    for j in 1..=s {
        acc += log_gamma((r - T::from_usize_lossy(j) + T::one()) * half)?;
    }
    Ok(-acc)
}

/// Log density of the unscaled block `Z` at `z`.
///
/// Returns `NegInf` when an eigenvalue of `z'z` is at least 1. A zero
/// eigenvalue is allowed and contributes `log 1 = 0`.
pub fn log_block_density<T: Real>(z: &DenseMatrix<T>, spec: &BlockSpec) -> Result<Extended<T>> {
    spec.check_shape(z)?;
    if spec.p < spec.q {
        return log_block_density(&z.transpose(), &spec.transposed());
    }
    let spectrum = gram_spectrum(z)?;
    log_block_density_with(&spectrum, spec)
}

fn log_block_density_with<T: Real>(
    spectrum: &SymSpectrum<T>,
    spec: &BlockSpec,
) -> Result<Extended<T>> {
    let (n, p, q) = (spec.n, spec.p, spec.q);
    let nf = T::from_usize_lossy(n);
    let pf = T::from_usize_lossy(p);
    let qf = T::from_usize_lossy(q);
    if spectrum.eigenvalues().iter().any(|&l| l >= T::one()) {
        return Ok(Extended::NegInf);
    }
    let exponent = (nf - pf - qf - T::one()) * T::lit(0.5);
    let log_det: T = spectrum.eigenvalues().iter().map(|&l| (-l).ln_1p()).sum();
    let value = -(pf * qf * T::lit(0.5)) * T::lit(std::f64::consts::TAU).ln()
        + log_wishart_const(nf - pf, q)?
        - log_wishart_const(nf, q)?
        + exponent * log_det;
    Ok(Extended::Finite(value))
}

/// Log density of `√n Z` at `x`: `log f(x/√n) - (pq/2) log n`.
pub fn log_scaled_block_density<T: Real>(
    x: &DenseMatrix<T>,
    spec: &BlockSpec,
) -> Result<Extended<T>> {
    spec.check_shape(x)?;
    let nf = T::from_usize_lossy(spec.n);
    let jacobian = T::from_usize_lossy(spec.p * spec.q) * T::lit(0.5) * nf.ln();
    Ok(log_block_density(&x.scale(nf.sqrt().recip()), spec)?.add(Extended::Finite(-jacobian)))
}

/// `log g_n(x) = -(pq/2) log 2π - tr(x'x)/2`.
pub fn log_gaussian_density<T: Real>(x: &DenseMatrix<T>) -> T {
    let pq = T::from_usize_lossy(x.rows() * x.cols());
    let ss: T = x.as_slice().iter().map(|&v| v * v).sum();
    -(pq * T::lit(0.5)) * T::lit(std::f64::consts::TAU).ln() - ss * T::lit(0.5)
}

/// `log K_n = (pq/2) log(2/n) + Σ_{j=1}^q [log Γ((n-j+1)/2) - log Γ((n-p-j+1)/2)]`.
#[allow(non_snake_case)]
pub fn log_Kn_exact<T: Real>(spec: &BlockSpec) -> Result<T> {
    let (n, p, q) = (spec.n, spec.p, spec.q);
    if p + q > n {
        return Err(precondition(
            "log_Kn_exact",
            format!("need p + q <= n, got p={p}, q={q}, n={n}"),
        ));
    }
    let nf = T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let mut acc = T::from_usize_lossy(p * q) * half * (T::lit(2.0) / nf).ln();
    for j in 1..=q {
        let top = T::from_usize_lossy(n - j + 1);
        let bottom = T::from_usize_lossy(n - p - j + 1);
        acc += log_gamma(top * half)? - log_gamma(bottom * half)?;
    }
    Ok(acc)
}

/// `-(p²q + pq²)/(4n) - xy/4 - (2x³y + 2xy³ + 3x²y²)/24` with the integer `p, q` of `spec`.
#[allow(non_snake_case)]
pub fn log_Kn_asymptotic(x: f64, y: f64, spec: &BlockSpec) -> f64 {
    let (n, p, q) = (spec.n as f64, spec.p as f64, spec.q as f64);
    -(p * p * q + p * q * q) / (4.0 * n)
        - x * y / 4.0
        - (2.0 * x.powi(3) * y + 2.0 * x * y.powi(3) + 3.0 * x * x * y * y) / 24.0
}

/// `log L_n = ((n-p-q-1)/2) Σ log(1 - λ_i/n) + Σ λ_i / 2`, `NegInf` when some `λ_i >= n`.
#[allow(non_snake_case)]
pub fn log_Ln<T: Real>(spectrum: &SymSpectrum<T>, spec: &BlockSpec) -> Result<Extended<T>> {
    let dim = spec.p.min(spec.q);
    if spectrum.dim() != spec.q && spectrum.dim() != dim {
        return Err(Error::Shape {
            expected: format!("spectrum of dimension {}", spec.q),
            got: format!("dimension {}", spectrum.dim()),
        });
    }
    let nf = T::from_usize_lossy(spec.n);
    if spectrum.eigenvalues().iter().any(|&l| l >= nf) {
        return Ok(Extended::NegInf);
    }
    let exponent = T::from_usize_lossy(spec.n) - T::from_usize_lossy(spec.p + spec.q + 1);
    let logs: T = spectrum
        .eigenvalues()
        .iter()
        .map(|&l| (-l / nf).ln_1p())
        .sum();
    Ok(Extended::Finite(
        exponent * T::lit(0.5) * logs + spectrum.trace() * T::lit(0.5),
    ))
}

/// `log(f_n(X) / g_n(X))` split as `log K_n + log L_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDensityRatio<T = f64> {
    pub log_k: T,
    pub log_l: Extended<T>,
    pub boundary_hit: bool,
}

impl<T: Real> LogDensityRatio<T> {
    pub fn log_ratio(&self) -> Extended<T> {
        self.log_l.add(Extended::Finite(self.log_k))
    }

    /// `|K_n L_n - 1|`, via `expm1`; equals 1 at the boundary.
    pub fn abs_deviation(&self) -> T {
        match self.log_ratio() {
            Extended::Finite(w) => w.exp_m1().abs(),
            Extended::NegInf => T::one(),
            Extended::PosInf => T::infinity(),
        }
    }
}

/// `K_n L_n` decomposition of the density ratio at `x`.
pub fn log_density_ratio<T: Real>(
    x: &DenseMatrix<T>,
    spec: &BlockSpec,
) -> Result<LogDensityRatio<T>> {
    spec.check_shape(x)?;
    let log_k = log_Kn_exact(spec)?;
    // X'X and XX' share their nonzero spectrum; use the smaller Gram matrix
    let spectrum = if spec.p < spec.q {
        gram_spectrum(&x.transpose())?
    } else {
        gram_spectrum(x)?
    };
    let log_l = log_Ln(&spectrum, spec)?;
    Ok(LogDensityRatio {
        log_k,
        log_l,
        boundary_hit: !log_l.is_finite(),
    })
}

/// Parameters of the lognormal limit of `K_n L_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    pub a_n: f64,
    pub sigma: f64,
    pub limit_mean_log: f64,
    pub limit_sd_log: f64,
}

/// `a_n = (p²q + pq²)/(4n) + (3xy + x³y + xy³)/12`, `σ = xy/4`, limit `N(-x²y²/8, σ²)` for `log K_n L_n`.
pub fn lognormal_params(x: f64, y: f64, spec: &BlockSpec) -> LognormalParams {
    let (n, p, q) = (spec.n as f64, spec.p as f64, spec.q as f64);
    let a_n =
        (p * p * q + p * q * q) / (4.0 * n) + (3.0 * x * y + x.powi(3) * y + x * y.powi(3)) / 12.0;
    let sigma = x * y / 4.0;
    LognormalParams {
        a_n,
        sigma,
        limit_mean_log: -(x * x * y * y) / 8.0,
        limit_sd_log: sigma,
    }
}

/// `φ(x, y) = E|exp(-x²y²/8 + (xy/4)ξ) - 1|`, `ξ ~ N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiBound {
    /// Adaptive quadrature split at the kink of the integrand.
    pub value: f64,
    /// Order-60 Gauss–Hermite rule.
    pub gauss_hermite: f64,
    /// `|GH(60) - GH(120)|`.
    pub gauss_hermite_error: f64,
    /// `√(e^{-t/8} - 2e^{-3t/32} + 1)` with `t = x²y²`.
    pub upper_bound: f64,
}

pub fn phi_lower_bound(x: f64, y: f64) -> Result<PhiBound> {
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(domain(
            "phi_lower_bound",
            format!("x, y must be finite and nonnegative, got ({x}, {y})"),
        ));
    }
    let t = (x * y).powi(2);
    let upper_bound = ((-t / 8.0).exp() - 2.0 * (-3.0 * t / 32.0).exp() + 1.0)
        .max(0.0)
        .sqrt();
    let sigma = x * y / 4.0;
    if sigma == 0.0 {
        return Ok(PhiBound {
            value: 0.0,
            gauss_hermite: 0.0,
            gauss_hermite_error: 0.0,
            upper_bound,
        });
    }
    let g = |xi: f64| (sigma * xi - 2.0 * sigma * sigma).exp_m1().abs();
    let density = |xi: f64| (-0.5 * xi * xi).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let kink = 2.0 * sigma;
    let lo = kink.min(0.0) - 12.0;
    // e^{σξ - ξ²/2} peaks at ξ = σ
    let hi = kink.max(sigma) + 12.0;
    let integrand = |xi: f64| g(xi) * density(xi);
    let value =
        adaptive_simpson(integrand, lo, kink, 1e-13) + adaptive_simpson(integrand, kink, hi, 1e-13);
    let gh60 = GaussHermite::new(60)?.expectation(g);
    let gh120 = GaussHermite::new(120)?.expectation(g);
    Ok(PhiBound {
        value,
        gauss_hermite: gh60,
        gauss_hermite_error: (gh60 - gh120).abs(),
        upper_bound,
    })
}

//! Trace moments of the Wishart matrix `X'X` for a `p x q` Gaussian block `X`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{gram, DenseMatrix};
use crate::sampler::{gaussian_matrix, SeedSpec};
use crate::scalar::Real;

/// `E tr((X'X)^k)` for `k = 1` (`pq`) and `k = 2` (`pq(p + q + 1)`).
pub fn expected_trace_pow_exact<T: Real>(p: usize, q: usize, k: u32) -> Result<T> {
    let (pf, qf) = (T::from_usize_lossy(p), T::from_usize_lossy(q));
    match k {
        1 => Ok(pf * qf),
        2 => Ok(pf * qf * (pf + qf + T::one())),
        _ => Err(domain(
            "expected_trace_pow_exact",
            format!("only k = 1, 2 are available, got {k}"),
        )),
    }
}

/// Narayana number `N(k, j) = C(k, j-1) C(k-1, j-1) / j`, `1 <= j <= k`.
pub fn narayana(k: u32, j: u32) -> u128 {
    if j == 0 || j > k {
        return 0;
    }
    binomial(k, j - 1) * binomial(k - 1, j - 1) / u128::from(j)
}

fn binomial(n: u32, r: u32) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Leading term `p^k q Σ_{r=0}^{k-1} (q/p)^r C(k,r) C(k-1,r) / (r+1)`.
///
/// Each summand is the integer `N(k, r+1) p^{k-r} q^{r+1}`; the sum is exact
/// whenever it fits in 128 bits.
pub fn expected_trace_pow_asymptotic(p: usize, q: usize, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(domain(
            "expected_trace_pow_asymptotic",
            "k must be at least 1",
        ));
    }
    let exact = (0..k).try_fold(0u128, |acc, r| {
        let pp = (p as u128).checked_pow(k - r)?;
        let qq = (q as u128).checked_pow(r + 1)?;
        narayana(k, r + 1)
            .checked_mul(pp)?
            .checked_mul(qq)?
            .checked_add(acc)
    });
    Ok(match exact {
        Some(v) => v as f64,
        None => (0..k)
            .map(|r| {
                narayana(k, r + 1) as f64
                    * (p as f64).powi((k - r) as i32)
                    * (q as f64).powi((r + 1) as i32)
            })
            .sum(),
    })
}

/// Limit of `tr((X'X)^k) / q^{k+1}` with `p/q → η`.
pub fn trace_pow_lln_limit(eta: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(domain("trace_pow_lln_limit", "k must be at least 1"));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(domain(
            "trace_pow_lln_limit",
            format!("eta must be positive, got {eta}"),
        ));
    }
    Ok((0..k)
        .map(|r| narayana(k, r + 1) as f64 * eta.powi((k - r) as i32))
        .sum())
}

/// `p²q² + 8pq(p + q)²`.
pub fn var_trace2_asymptotic(p: usize, q: usize) -> f64 {
    let (p, q) = (p as f64, q as f64);
    p * p * q * q + 8.0 * p * q * (p + q).powi(2)
}

/// `4pq(p + q)`.
pub fn cov_trace12_asymptotic(p: usize, q: usize) -> f64 {
    let (p, q) = (p as f64, q as f64);
    4.0 * p * q * (p + q)
}

/// Monte Carlo estimate of `E tr((X'X)^k)` next to its reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub p: usize,
    pub q: usize,
    pub k: u32,
    pub exact: Option<f64>,
    pub asymptotic: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMoments {
    pub reports: Vec<MomentReport>,
    /// Sample variance of `tr((X'X)²)`.
    pub var_trace2: Estimate,
    /// Sample covariance of `tr(X'X)` and `tr((X'X)²)`.
    pub cov_trace12: Estimate,
    /// Per-replicate `tr((X'X)^k)`, `k = 1..=k_max`.
    pub samples: Vec<Vec<f64>>,
}

/// `tr(W), tr(W²), ..., tr(W^k_max)` for `W = X'X`, using the smaller Gram matrix.
pub fn trace_powers(x: &DenseMatrix<f64>, k_max: u32) -> Vec<f64> {
    let w = if x.rows() < x.cols() {
        gram(&x.transpose())
    } else {
        gram(x)
    };
    let mut out = Vec::with_capacity(k_max as usize);
    let mut power = w.clone();
    for k in 1..=k_max {
        out.push(power.trace());
        if k < k_max {
            power = power.matmul(&w).expect("square");
        }
    }
    out
}

/// Replicate `r` uses the stream `SeedSpec::derive(seed.master_seed, "moments", seed.stream_id, r)`.
pub fn mc_trace_moments(
    p: usize,
    q: usize,
    k_max: u32,
    reps: usize,
    seed: SeedSpec,
) -> Result<TraceMoments> {
    if !(1..=8).contains(&k_max) {
        return Err(domain(
            "mc_trace_moments",
            format!("need 1 <= k_max <= 8, got {k_max}"),
        ));
    }
    if reps < 2 {
        return Err(domain(
            "mc_trace_moments",
            format!("need at least 2 replicates, got {reps}"),
        ));
    }
    if p == 0 || q == 0 {
        return Err(domain("mc_trace_moments", "p and q must be positive"));
    }
    let samples: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let x = gaussian_matrix(
                p,
                q,
                SeedSpec::derive(seed.master_seed, "moments", seed.stream_id, r),
            )?;
            Ok(trace_powers(&x, k_max))
        })
        .collect::<Result<_>>()?;
    let column = |k: usize| samples.iter().map(|s| s[k]).collect::<Vec<_>>();
    let reports = (1..=k_max)
        .map(|k| {
            let (mean, se) = mean_se(&column(k as usize - 1));
            Ok(MomentReport {
                p,
                q,
                k,
                exact: expected_trace_pow_exact(p, q, k).ok(),
                asymptotic: expected_trace_pow_asymptotic(p, q, k)?,
                mc_mean: mean,
                mc_se: se,
                reps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let t1 = column(0);
    let (var_trace2, cov_trace12) = if k_max >= 2 {
        let t2 = column(1);
        (covariance(&t2, &t2), covariance(&t1, &t2))
    } else {
        let nan = Estimate {
            value: f64::NAN,
            se: f64::NAN,
        };
        (nan, nan)
    };
    Ok(TraceMoments {
        reports,
        var_trace2,
        cov_trace12,
        samples,
    })
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample covariance with the large-sample standard error
/// `√((m_22 - c²)/N)`, `m_22 = mean((a-ā)²(b-b̄)²)`.
pub(crate) fn covariance(a: &[f64], b: &[f64]) -> Estimate {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let value = prods.iter().sum::<f64>() / (n - 1.0);
    let m22 = prods.iter().map(|d| d * d).sum::<f64>() / n;
    Estimate {
        value,
        se: ((m22 - value * value).max(0.0) / n).sqrt(),
    }
}

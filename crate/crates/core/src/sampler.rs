//! Reproducible Gaussian sampling and the Gram–Schmidt coupling between a
//! Gaussian matrix `Y` and a Haar orthogonal matrix `Γ`.
//!
//! Uniforms come from ChaCha8 keyed by the master seed, with the stream id
//! selecting one of its 2^64 independent streams; normals are produced by the
//! Box–Muller transform. Matrices are filled column by column, so the first
//! `m` columns of an `n x n` draw coincide with an `n x m` draw from the same
//! [`SeedSpec`].

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, Result};
use crate::linalg::{mgs_in_place, DenseMatrix};
use crate::Matrix;

/// Seed pair that fully determines a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Stream for replicate `replicate` of grid cell `cell` in experiment `tag`.
    /// Depends only on its arguments, never on scheduling.
    pub fn derive(master_seed: u64, tag: &str, cell: u64, replicate: u64) -> Self {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for b in tag.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        let stream_id = splitmix64(splitmix64(h ^ splitmix64(cell)) ^ replicate);
        Self::new(master_seed, stream_id)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard normal deviates from one seeded stream.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: SeedSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.master_seed);
        rng.set_stream(seed.stream_id);
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = self.next_normal());
    }
}

/// `rows x cols` column-major buffer of i.i.d. standard normals.
pub fn gaussian_columns(rows: usize, cols: usize, seed: SeedSpec) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    GaussianStream::new(seed).fill_normal(&mut out);
    out
}

/// Matrix of i.i.d. standard normals, generated in column-major order.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: SeedSpec) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(domain("gaussian_matrix", "rows and cols must be positive"));
    }
    DenseMatrix::from_col_major(rows, cols, &gaussian_columns(rows, cols, seed))
}

/// A Gaussian matrix together with the Gram–Schmidt orthonormalization of its
/// leading columns.
///
/// Columns are stored column-major. With `cols == n` the `Γ` part is Haar
/// distributed on `O(n)`; with fewer columns it is the leading block of such a
/// matrix.
#[derive(Debug, Clone)]
pub struct HaarCoupling {
    n: usize,
    cols: usize,
    y: Vec<f64>,
    gamma: Vec<f64>,
    w_norms: Vec<f64>,
    deltas_max_abs: Vec<f64>,
    reorthogonalized: usize,
}

impl HaarCoupling {
    /// Couples the given `n x m` matrix (`m <= n`) with its Gram–Schmidt output.
    pub fn from_matrix(y: &Matrix) -> Result<Self> {
        let (n, m) = y.shape();
        if m > n {
            return Err(precondition(
                "HaarCoupling::from_matrix",
                format!("need cols <= rows, got {n}x{m}"),
            ));
        }
        Self::from_columns(n, m, y.to_col_major())
    }

    fn from_columns(n: usize, cols: usize, y: Vec<f64>) -> Result<Self> {
        let mut gamma = y.clone();
        let (w_norms, reorthogonalized) = mgs_in_place(n, cols, &mut gamma)?;
        // Δ_j = y_j - w_j, with w_j = ‖w_j‖ γ_j; Δ_1 = 0 by definition
        let deltas_max_abs = (0..cols)
            .map(|j| {
                if j == 0 {
                    return 0.0;
                }
                let yj = &y[j * n..(j + 1) * n];
                let gj = &gamma[j * n..(j + 1) * n];
                yj.iter()
                    .zip(gj)
                    .fold(0.0f64, |acc, (&a, &g)| acc.max((a - w_norms[j] * g).abs()))
            })
            .collect();
        Ok(Self {
            n,
            cols,
            y,
            gamma,
            w_norms,
            deltas_max_abs,
            reorthogonalized,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn y(&self) -> Matrix {
        DenseMatrix::from_col_major(self.n, self.cols, &self.y).expect("consistent shape")
    }

    pub fn gamma(&self) -> Matrix {
        DenseMatrix::from_col_major(self.n, self.cols, &self.gamma).expect("consistent shape")
    }

    pub fn y_column(&self, j: usize) -> &[f64] {
        &self.y[j * self.n..(j + 1) * self.n]
    }

    pub fn gamma_column(&self, j: usize) -> &[f64] {
        &self.gamma[j * self.n..(j + 1) * self.n]
    }

    pub fn gamma_entry(&self, i: usize, j: usize) -> f64 {
        self.gamma[j * self.n + i]
    }

    pub fn w_norms(&self) -> &[f64] {
        &self.w_norms
    }

    /// `max_i |Δ_ij|` per column, `Δ_1 = 0`.
    pub fn deltas_max_abs(&self) -> &[f64] {
        &self.deltas_max_abs
    }

    /// `Δ_j = y_j - w_j` for 0-based column `j`.
    pub fn delta_column(&self, j: usize) -> Vec<f64> {
        if j == 0 {
            return vec![0.0; self.n];
        }
        self.y_column(j)
            .iter()
            .zip(self.gamma_column(j))
            .map(|(&a, &g)| a - self.w_norms[j] * g)
            .collect()
    }

    pub fn reorthogonalized(&self) -> usize {
        self.reorthogonalized
    }
}

/// Full `n x n` coupling.
pub fn sample_haar_coupled(n: usize, seed: SeedSpec) -> Result<HaarCoupling> {
    sample_haar_columns(n, n, seed)
}

/// First `m` columns of the `n x n` coupling drawn from `seed`.
pub fn sample_haar_columns(n: usize, m: usize, seed: SeedSpec) -> Result<HaarCoupling> {
    if n == 0 || m == 0 || m > n {
        return Err(domain(
            "sample_haar_columns",
            format!("need 1 <= m <= n, got n={n}, m={m}"),
        ));
    }
    HaarCoupling::from_columns(n, m, gaussian_columns(n, m, seed))
}

/// `ε_n(m) = max_{i <= n, j <= m} |√n γ_ij - y_ij|`.
pub fn epsilon_stat(c: &HaarCoupling, m: usize) -> Result<f64> {
    if m == 0 || m > c.cols {
        return Err(precondition(
            "epsilon_stat",
            format!("need 1 <= m <= {}, got {m}", c.cols),
        ));
    }
    let root_n = (c.n as f64).sqrt();
    let len = m * c.n;
    Ok(c.gamma[..len]
        .iter()
        .zip(&c.y[..len])
        .fold(0.0f64, |acc, (&g, &y)| acc.max((root_n * g - y).abs())))
}

/// `max_{2 <= j <= m} max_i |Δ_ij|`.
pub fn delta_sup(c: &HaarCoupling, m: usize) -> Result<f64> {
    if m < 2 || m > c.cols {
        return Err(precondition(
            "delta_sup",
            format!("need 2 <= m <= {}, got {m}", c.cols),
        ));
    }
    Ok(c.deltas_max_abs[1..m]
        .iter()
        .fold(0.0f64, |acc, &d| acc.max(d)))
}

/// `⌈nα / (ln n - (5/4) ln ln n)⌉`.
pub fn n_alpha(n: usize, alpha: f64) -> Result<usize> {
    if n < 3 {
        return Err(domain("n_alpha", format!("need n >= 3, got {n}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(domain(
            "n_alpha",
            format!("alpha must be positive, got {alpha}"),
        ));
    }
    let ln = (n as f64).ln();
    Ok((n as f64 * alpha / (ln - 1.25 * ln.ln())).ceil() as usize)
}

/// `⌊nα / ln n⌋`.
pub fn n_alpha_floor(n: usize, alpha: f64) -> Result<usize> {
    if n < 2 {
        return Err(domain("n_alpha_floor", format!("need n >= 2, got {n}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(domain(
            "n_alpha_floor",
            format!("alpha must be positive, got {alpha}"),
        ));
    }
    Ok((n as f64 * alpha / (n as f64).ln()).floor() as usize)
}

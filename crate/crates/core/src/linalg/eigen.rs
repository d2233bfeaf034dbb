use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix in nonincreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSpectrum<T> {
    eigenvalues: Vec<T>,
}

impl<T: Real> SymSpectrum<T> {
    /// Wraps eigenvalues, sorting them into nonincreasing order.
    pub fn new(mut eigenvalues: Vec<T>) -> Self {
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        Self { eigenvalues }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn largest(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn trace(&self) -> T {
        self.eigenvalues.iter().copied().sum()
    }

    pub fn power_sum(&self, k: i32) -> T {
        self.eigenvalues.iter().map(|l| l.powi(k)).sum()
    }
}

/// `X'X`, symmetrized as `(A + A')/2` after accumulation.
pub fn gram<T: Real>(x: &DenseMatrix<T>) -> DenseMatrix<T> {
    let (p, q) = x.shape();
    let mut g = DenseMatrix::zeros(q, q);
    let data = x.as_slice();
    for r in 0..p {
        let row = &data[r * q..(r + 1) * q];
        for i in 0..q {
            let a = row[i];
            for j in 0..q {
                g[(i, j)] += a * row[j];
            }
        }
    }
    let half = T::lit(0.5);
    for i in 0..q {
        for j in (i + 1)..q {
            let s = (g[(i, j)] + g[(j, i)]) * half;
            g[(i, j)] = s;
            g[(j, i)] = s;
        }
    }
    g
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
///
/// Iterates until the off-diagonal Frobenius norm falls to `1e-12 ‖A‖_F`
/// (or a few ulps for `f32`); fails after 100 sweeps.
pub fn sym_eigenvalues<T: Real>(a: &DenseMatrix<T>) -> Result<SymSpectrum<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    let scale = a.max_abs().max(T::one());
    let asym = a.asymmetry();
    if asym > T::tol_floor(1e-10) * scale {
        return Err(Error::NotSymmetric {
            asymmetry: asym.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    let mut m: Vec<T> = a.as_slice().to_vec();
    let fro = a.frobenius_norm();
    let target = T::tol_floor(1e-12) * fro;
    let two = T::lit(2.0);

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if (off * two).sqrt() <= target {
            return Ok(SymSpectrum::new((0..n).map(|i| m[i * n + i]).collect()));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (two * apq);
                let t = if theta.abs() > T::lit(1e150) {
                    (two * theta).recip()
                } else {
                    let t = (theta.abs() + (theta * theta + T::one()).sqrt()).recip();
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    let new_p = c * akp - s * akq;
                    let new_q = s * akp + c * akq;
                    m[k * n + p] = new_p;
                    m[p * n + k] = new_p;
                    m[k * n + q] = new_q;
                    m[q * n + k] = new_q;
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = T::zero();
                m[q * n + p] = T::zero();
            }
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

/// Spectrum of `X'X` with round-off negatives clamped to zero.
///
/// Eigenvalues down to `-1e-9 ‖X'X‖_op` are treated as zero; anything more
/// negative is reported as an error.
pub fn gram_spectrum<T: Real>(x: &DenseMatrix<T>) -> Result<SymSpectrum<T>> {
    let raw = sym_eigenvalues(&gram(x))?;
    let op = raw
        .eigenvalues
        .iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tol = T::tol_floor(1e-9) * op;
    let mut vals = raw.eigenvalues;
    for v in vals.iter_mut() {
        if *v < -tol {
            return Err(Error::NegativeEigenvalue {
                value: v.to_f64().unwrap_or(f64::NAN),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    Ok(SymSpectrum::new(vals))
}

/// `tr(A^k)` by repeated multiplication.
pub fn trace_power<T: Real>(a: &DenseMatrix<T>, k: u32) -> Result<T> {
    if k == 0 {
        return Err(crate::error::precondition(
            "trace_power",
            "k must be at least 1",
        ));
    }
    if a.rows() != a.cols() {
        return Err(Error::Shape {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    if k == 1 {
        return Ok(a.trace());
    }
    // tr(A^k) = Σ_ij (A^{k-1})_ij A_ji, so the last product needs no matmul
    let mut acc = a.clone();
    for _ in 2..k {
        acc = acc.matmul(a)?;
    }
    let n = a.rows();
    let mut tr = T::zero();
    for i in 0..n {
        for j in 0..n {
            tr += acc[(i, j)] * a[(j, i)];
        }
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
        let mut state = seed;
        DenseMatrix::from_fn(rows, cols, |_, _| {
            state = state
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .unwrap()
    }

    // LU determinant with partial pivoting.
    fn det_oracle(a: &DenseMatrix<f64>) -> f64 {
        let n = a.rows();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)]).collect())
            .collect();
        let mut det = 1.0;
        for c in 0..n {
            let piv = (c..n)
                .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
                .unwrap();
            if piv != c {
                m.swap(piv, c);
                det = -det;
            }
            det *= m[c][c];
            for r in (c + 1)..n {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        det
    }

    #[test]
    fn gram_examples() {
        let x = DenseMatrix::from_row_major(1, 1, vec![3.0]).unwrap();
        assert_eq!(gram(&x).as_slice(), &[9.0]);
        assert_eq!(
            gram(&DenseMatrix::<f64>::identity(2)),
            DenseMatrix::identity(2)
        );

        let x = lcg_matrix(5, 3, 7);
        let g = gram(&x);
        for i in 0..3 {
            for j in 0..3 {
                let mut naive = 0.0;
                for r in 0..5 {
                    naive += x[(r, i)] * x[(r, j)];
                }
                assert!((g[(i, j)] - naive).abs() < 1e-12);
            }
        }
        assert_eq!(g.asymmetry(), 0.0);
    }

    #[test]
    fn eigen_examples() {
        let d = DenseMatrix::diagonal(&[3.0, 1.0, 2.0]);
        assert_eq!(sym_eigenvalues(&d).unwrap().eigenvalues(), &[3.0, 2.0, 1.0]);

        let a = DenseMatrix::from_row_major(2, 2, vec![2.0f64, 1.0, 1.0, 2.0]).unwrap();
        let s = sym_eigenvalues(&a).unwrap();
        assert!((s.eigenvalues()[0] - 3.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_random_gram_trace_and_determinant() {
        for seed in 0..5 {
            let x = lcg_matrix(9, 6, seed);
            let g = gram(&x);
            let s = sym_eigenvalues(&g).unwrap();
            assert_eq!(s.dim(), 6);
            assert!(s.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
            assert!(((s.trace() - g.trace()) / g.trace()).abs() < 1e-8);
            let prod: f64 = s.eigenvalues().iter().product();
            let det = det_oracle(&g);
            assert!(((prod - det) / det).abs() < 1e-8, "{prod} vs {det}");
            assert!(s.eigenvalues().iter().all(|&l| l >= -1e-9 * s.largest()));
        }
    }

    #[test]
    fn eigen_single_precision() {
        let a = DenseMatrix::from_row_major(2, 2, vec![2.0f32, 1.0, 1.0, 2.0]).unwrap();
        let s = sym_eigenvalues(&a).unwrap();
        assert!((s.eigenvalues()[0] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn eigen_rejects_bad_input() {
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            sym_eigenvalues(&a),
            Err(Error::NotSymmetric { .. })
        ));
        let r = DenseMatrix::from_row_major(1, 2, vec![1.0, 2.0]).unwrap();
        assert!(sym_eigenvalues(&r).is_err());
    }

    #[test]
    fn gram_spectrum_clamps_rank_deficiency() {
        // rank-one 3x3 Gram
        let x = DenseMatrix::from_row_major(1, 3, vec![1.0f64, 2.0, 3.0]).unwrap();
        let s = gram_spectrum(&x).unwrap();
        assert!((s.largest() - 14.0).abs() < 1e-12);
        assert!(s.eigenvalues()[1..].iter().all(|&l| l >= 0.0 && l < 1e-12));
    }

    #[test]
    fn trace_power_examples() {
        let i3 = DenseMatrix::<f64>::identity(3);
        for k in 1..=8 {
            assert_eq!(trace_power(&i3, k).unwrap(), 3.0);
        }
        let a = DenseMatrix::from_row_major(1, 1, vec![4.0]).unwrap();
        assert_eq!(trace_power(&a, 2).unwrap(), 16.0);
        assert!(trace_power(&a, 0).is_err());

        let g = gram(&lcg_matrix(7, 4, 3));
        let s = sym_eigenvalues(&g).unwrap();
        for k in 1..=8 {
            let tp = trace_power(&g, k).unwrap();
            let spectral = s.power_sum(k as i32);
            assert!(((tp - spectral) / spectral).abs() < 1e-8, "k={k}");
        }
    }
}

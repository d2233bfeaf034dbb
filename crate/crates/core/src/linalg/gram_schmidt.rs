use num_traits::Num;

use super::{axpy, dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

// Columns are swept against finished columns this many at a time; each
// finished column is then streamed once per block instead of once per column.
const BLOCK: usize = 16;

/// Output of Gram–Schmidt on the columns `y_1, ..., y_m` of an `n x m` matrix.
#[derive(Debug, Clone)]
pub struct GramSchmidt<T> {
    /// Orthonormal columns `γ_j = w_j / ‖w_j‖`.
    pub q: DenseMatrix<T>,
    /// `‖w_j‖`, the residual norm of `y_j` after projecting out `γ_1..γ_{j-1}`.
    pub w_norms: Vec<T>,
    /// Number of columns that needed a second orthogonalization pass.
    pub reorthogonalized: usize,
}

/// Modified Gram–Schmidt with positive normalization (no sign flips).
///
/// A column is orthogonalized a second time when its norm drops by more than
/// a factor √2 during the first pass. Fails when a residual norm is at most
/// `1e-10 √n`.
pub fn mgs_orthonormalize<T: Real>(y: &DenseMatrix<T>) -> Result<GramSchmidt<T>> {
    let (n, m) = y.shape();
    let mut cols = y.to_col_major();
    let (w_norms, reorthogonalized) = mgs_in_place(n, m, &mut cols)?;
    Ok(GramSchmidt {
        q: DenseMatrix::from_col_major(n, m, &cols)?,
        w_norms,
        reorthogonalized,
    })
}

/// Orthonormalizes `m` column-major columns of length `n` in place and returns
/// `‖w_j‖` for each. Column `j` depends only on columns `0..=j`, so the first
/// `k` outputs don't change if more columns are appended.
pub(crate) fn mgs_in_place<T: Real>(n: usize, m: usize, cols: &mut [T]) -> Result<(Vec<T>, usize)> {
    assert_eq!(cols.len(), n * m);
    let floor = T::lit(1e-10) * T::from_usize_lossy(n).sqrt();
    let drop = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let mut norms = Vec::with_capacity(m);
    let mut reorth = 0;

    for b0 in (0..m).step_by(BLOCK) {
        let b1 = (b0 + BLOCK).min(m);
        let (done, rest) = cols.split_at_mut(b0 * n);
        let active = &mut rest[..(b1 - b0) * n];
        let initial: Vec<T> = active.chunks_exact(n).map(|c| dot(c, c).sqrt()).collect();

        for qi in done.chunks_exact(n) {
            for v in active.chunks_exact_mut(n) {
                let r = dot(qi, v);
                axpy(v, -r, qi);
            }
        }

        for c in 0..(b1 - b0) {
            let (prev, cur) = active.split_at_mut(c * n);
            let v = &mut cur[..n];
            for qi in prev.chunks_exact(n) {
                let r = dot(qi, v);
                axpy(v, -r, qi);
            }
            let mut norm = dot(v, v).sqrt();
            if norm < drop * initial[c] {
                reorth += 1;
                for qi in done.chunks_exact(n).chain(prev.chunks_exact(n)) {
                    let r = dot(qi, v);
                    axpy(v, -r, qi);
                }
                norm = dot(v, v).sqrt();
            }
            if !(norm > floor) {
                return Err(Error::RankDeficient {
                    column: b0 + c,
                    norm: norm.to_f64().unwrap_or(f64::NAN),
                });
            }
            let inv = norm.recip();
            v.iter_mut().for_each(|x| *x *= inv);
            norms.push(norm);
        }
    }
    Ok((norms, reorth))
}

/// Classical Gram–Schmidt in exact field arithmetic: returns the unnormalized
/// orthogonal columns `w_j = y_j - Σ_{i<j} (y_j·w_i / ‖w_i‖²) w_i` and their
/// squared norms. Works over rationals, where it is exact.
pub fn classical_gram_schmidt<T>(y: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, Vec<T>)>
where
    T: Clone + Num,
{
    let (n, m) = y.shape();
    let inner = |a: &[T], b: &[T]| {
        a.iter()
            .zip(b)
            .fold(T::zero(), |acc, (x, z)| acc + x.clone() * z.clone())
    };
    let mut ws: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut sq: Vec<T> = Vec::with_capacity(m);
    for j in 0..m {
        let yj = y.column(j);
        let mut w = yj.clone();
        for (wi, si) in ws.iter().zip(&sq) {
            let coef = inner(&yj, wi) / si.clone();
            for (wk, wik) in w.iter_mut().zip(wi) {
                *wk = wk.clone() - coef.clone() * wik.clone();
            }
        }
        let s = inner(&w, &w);
        if s.is_zero() {
            return Err(Error::RankDeficient {
                column: j,
                norm: 0.0,
            });
        }
        ws.push(w);
        sq.push(s);
    }
    let w = DenseMatrix::from_fn(n, m, |i, j| ws[j][i].clone())?;
    Ok((w, sq))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_fixed() {
        let gs = mgs_orthonormalize(&DenseMatrix::<f64>::identity(4)).unwrap();
        assert_eq!(gs.q, DenseMatrix::identity(4));
        assert!(gs.w_norms.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn hand_example() {
        // columns (3, 4) and (1, 0)
        let y = DenseMatrix::from_row_major(2, 2, vec![3.0f64, 1.0, 4.0, 0.0]).unwrap();
        let gs = mgs_orthonormalize(&y).unwrap();
        let want = [0.6, 0.8, 0.8, -0.6];
        for (got, want) in gs.q.to_col_major().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((gs.w_norms[0] - 5.0).abs() < 1e-15);
        assert!((gs.w_norms[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rank_deficiency() {
        let y = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            mgs_orthonormalize(&y),
            Err(Error::RankDeficient { column: 1, .. })
        ));
    }

    #[test]
    fn prefix_stability_across_block_boundary() {
        let mut s = 11u64;
        let y = DenseMatrix::from_fn(40, 37, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .unwrap();
        let full = mgs_orthonormalize(&y).unwrap();
        let part = mgs_orthonormalize(&y.block(40, 20).unwrap()).unwrap();
        assert_eq!(full.q.block(40, 20).unwrap(), part.q);
        assert_eq!(&full.w_norms[..20], &part.w_norms[..]);
        assert!(full.q.orthonormality_residual() < 1e-12);
    }
}

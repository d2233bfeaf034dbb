//! Dense real matrices, Gram–Schmidt orthonormalization and a Jacobi
//! eigensolver for symmetric (Gram) matrices.

mod eigen;
mod gram_schmidt;
mod matrix;

pub use eigen::{gram, gram_spectrum, sym_eigenvalues, trace_power, SymSpectrum};
pub(crate) use gram_schmidt::mgs_in_place;
pub use gram_schmidt::{classical_gram_schmidt, mgs_orthonormalize, GramSchmidt};
pub use matrix::DenseMatrix;

/// Unrolled dot product; four partial sums keep the loop vectorizable while
/// fixing the summation order.
#[inline]
pub(crate) fn dot<T: crate::Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = T::zero();
    for (&x, &y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy<T: crate::Real>(y: &mut [T], alpha: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

//! Scalar abstractions shared by the numeric kernels.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// Convergence floor for iterative kernels: never tighter than a few ulps.
    #[inline]
    fn tol_floor(requested: f64) -> Self {
        let eps = Self::epsilon() * Self::lit(8.0);
        Self::lit(requested).max(eps)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Extended real value with explicit infinities.
///
/// Infinite results of the rate function and of log densities outside their
/// support are reported as `PosInf`/`NegInf` rather than as IEEE infinities,
/// so they can't be confused with an overflow.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Extended<T = f64> {
    Finite(T),
    PosInf,
    NegInf,
}

impl<T: Real> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Maps into an IEEE float, sending the sentinels to the matching infinity.
    pub fn to_float(&self) -> T {
        match *self {
            Extended::Finite(v) => v,
            Extended::PosInf => T::infinity(),
            Extended::NegInf => T::neg_infinity(),
        }
    }

    /// Sum of two extended values. `PosInf + NegInf` is not defined and panics.
    pub fn add(self, other: Self) -> Self {
        use Extended::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => panic!("indeterminate +inf + -inf"),
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        }
    }
}

impl<T: Real> From<T> for Extended<T> {
    fn from(v: T) -> Self {
        Extended::Finite(v)
    }
}

//! Small self-contained linear algebra: dense and banded LU, and Krylov
//! iterations on matrix-free operators.

mod banded;
mod dense;
mod krylov;

pub use banded::BandedLu;
pub use dense::{DenseLu, DenseMatrix};
pub use krylov::{conjugate_gradient, gmres, KrylovOutcome};

use crate::scalar::Scalar;

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

pub(crate) fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * *xi);
}

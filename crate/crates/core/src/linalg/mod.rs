//! Linear algebra kernels used by the spectral engine.

pub mod band;
pub mod dense;
pub mod lanczos;

use crate::grid_operator::DiscreteHamiltonian;
use crate::scalar::Real;

/// A symmetric linear operator known through its action.
pub trait SymOperator<T: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    fn norm_bound(&self) -> T;
}

impl<T: Real> SymOperator<T> for DiscreteHamiltonian<T> {
    fn dim(&self) -> usize {
        DiscreteHamiltonian::dim(self)
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        DiscreteHamiltonian::apply(self, x, y)
    }

    fn norm_bound(&self) -> T {
        DiscreteHamiltonian::norm_bound(self)
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha·x`
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

//! Complex iterative kernels: GMRES, weighted Jacobi, lexicographic
//! Gauss–Seidel, and a banded LU factorization for the coarsest level.

mod direct;
mod gmres;
mod relax;

use num_complex::Complex64 as c64;

use crate::sparse::CsrMatrix;

pub use direct::{direct_solve, BandedLu};
pub use gmres::{fgmres, gmres, GmresOptions, GmresOutcome};
pub use relax::{gauss_seidel_sweep, smooth, weighted_jacobi_sweep, Relaxation, RelaxationConfig};

/// A square linear map on complex vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[c64], y: &mut [c64]);
}

impl LinearOperator for CsrMatrix<c64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[c64], y: &mut [c64]) {
        self.mul_vec_into(x, y);
    }
}

/// Euclidean inner product, conjugate-linear in the first argument.
pub fn dot(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[c64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

//! Hybridizable discontinuous Galerkin discretization.
//!
//! For the mixed Helmholtz problem
//!
//! ```text
//!   i k q + grad u = 0,   i k u + div q = f   in Omega,
//!   -q.n + u = g                              on dOmega,
//! ```
//!
//! the element unknowns `(q_h, u_h)` are eliminated element by element and
//! the remaining unknown is the trace `lambda` on the mesh skeleton. On each
//! triangle the local problem maps trace data to `(Q_lambda, U_lambda)`; the
//! skeleton form is
//!
//! ```text
//!   a(lambda, mu) = -<Qhat_lambda . n, mu>_{dT_h} + <lambda, mu>_{dOmega},
//!   Qhat . n = Q . n + tau (U - lambda),   tau = p / (k h_T).
//! ```
//!
//! [`SkeletonSystem`] stores both the Galerkin matrix of `a` in the nodal
//! trace basis (complex symmetric) and the operator `A = M^{-1} S` that
//! represents `a` with respect to the skeleton inner product `<., .>_{dT_h}`,
//! where interior edges are counted once per adjacent element.

mod assemble;
mod local;
pub mod oned;
mod poisson;

use std::sync::Arc;

use num_complex::Complex64 as c64;

use crate::sparse::{BlockDiagonal, CsrMatrix};

pub use assemble::{
    assemble_condensed, skeleton_mass as skeleton_mass_2d, local_operator_for, recover_interior, solve_uncondensed_reference, ElementFields,
    InteriorSolution,
};
pub use local::{build_local_operator, local_blocks, LocalBlocks, LocalCoefficients, LocalElementOperator, TriangleGeometry};
pub use poisson::{assemble_poisson, PoissonSystem};

/// A scalar field on the plane.
pub type Field = Arc<dyn Fn([f64; 2]) -> c64 + Send + Sync>;
/// Boundary data `g(x, n)`; it may depend on the outward normal.
pub type BoundaryField = Arc<dyn Fn([f64; 2], [f64; 2]) -> c64 + Send + Sync>;

/// Mixed-form Helmholtz data: wavenumber, volume source `f`, impedance data
/// `g`, and polynomial degree.
#[derive(Clone)]
pub struct HelmholtzProblem {
    pub p: usize,
    /// Evaluated at element centroids; must be positive.
    pub wavenumber: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
    pub source: Field,
    pub boundary: BoundaryField,
}

impl HelmholtzProblem {
    /// Constant wavenumber, zero data.
    pub fn homogeneous(kappa: f64, p: usize) -> Self {
        Self {
            p,
            wavenumber: Arc::new(move |_| kappa),
            source: Arc::new(|_| c64::default()),
            boundary: Arc::new(|_, _| c64::default()),
        }
    }

    pub fn with_source(mut self, f: impl Fn([f64; 2]) -> c64 + Send + Sync + 'static) -> Self {
        self.source = Arc::new(f);
        self
    }

    pub fn with_boundary(mut self, g: impl Fn([f64; 2], [f64; 2]) -> c64 + Send + Sync + 'static) -> Self {
        self.boundary = Arc::new(g);
        self
    }

    pub fn with_wavenumber(mut self, k: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        self.wavenumber = Arc::new(k);
        self
    }
}

impl std::fmt::Debug for HelmholtzProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HelmholtzProblem").field("p", &self.p).finish_non_exhaustive()
    }
}

/// Condensed skeleton system on one level.
#[derive(Debug, Clone)]
pub struct SkeletonSystem {
    pub level: usize,
    pub p: usize,
    /// Matrix of `a(phi_j, phi_i)` in the nodal trace basis.
    pub galerkin: CsrMatrix<c64>,
    /// `A = M^{-1} S`, the operator defined through the skeleton inner product.
    pub operator: CsrMatrix<c64>,
    /// `b(phi_i)`.
    pub load: Vec<c64>,
    /// `F = M^{-1} b`.
    pub rhs: Vec<c64>,
    /// Skeleton mass matrix, interior facets counted once per adjacent element.
    pub mass: BlockDiagonal,
    /// Largest `k h / p` on this level, which drives smoother selection.
    pub kappa_h_over_p: f64,
}

impl SkeletonSystem {
    pub fn dim(&self) -> usize {
        self.galerkin.nrows()
    }

    /// Residual `F - A x` in operator form.
    pub fn residual(&self, x: &[c64]) -> Vec<c64> {
        let ax = self.operator.mul_vec(x);
        self.rhs.iter().zip(ax).map(|(f, a)| f - a).collect()
    }
}

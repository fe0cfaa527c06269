//! HDG discretization of the Helmholtz equation with a multilevel
//! preconditioner, plus one-dimensional local Fourier analysis tools.

pub mod basis;
pub mod error;
pub mod hdg;
pub mod io;
pub mod lfa;
pub mod mesh;
pub mod multilevel;
pub mod problems;
pub mod quadrature;
pub mod solvers;
pub mod sparse;
pub mod transfer;

pub use error::{Error, Result};
pub use num_complex::Complex64 as c64;

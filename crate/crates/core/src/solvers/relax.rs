use num_complex::Complex64 as c64;

use super::gmres::{gmres, GmresOptions};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

fn checked_diagonal(a: &CsrMatrix<c64>) -> Result<Vec<c64>> {
    let d = a.diagonal();
    match d.iter().position(|v| v.norm() == 0.0) {
        Some(i) => Err(Error::ZeroDiagonal(i)),
        None => Ok(d),
    }
}

/// `m` sweeps of `x <- x + omega D^{-1} (b - A x)`.
pub fn weighted_jacobi_sweep(a: &CsrMatrix<c64>, b: &[c64], x: &mut [c64], omega: f64, m: usize) -> Result<()> {
    let d = checked_diagonal(a)?;
    let mut ax = vec![c64::default(); x.len()];
    for _ in 0..m {
        a.mul_vec_into(x, &mut ax);
        for i in 0..x.len() {
            x[i] += omega * (b[i] - ax[i]) / d[i];
        }
    }
    Ok(())
}

/// `m` forward Gauss–Seidel sweeps in dof order.
pub fn gauss_seidel_sweep(a: &CsrMatrix<c64>, b: &[c64], x: &mut [c64], m: usize) -> Result<()> {
    let d = checked_diagonal(a)?;
    for _ in 0..m {
        for i in 0..x.len() {
            let (cols, vals) = a.row(i);
            let mut s = b[i];
            for (&j, &v) in cols.iter().zip(vals) {
                if j as usize != i {
                    s -= v * x[j as usize];
                }
            }
            x[i] = s / d[i];
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relaxation {
    WeightedJacobi { omega: f64 },
    GaussSeidel,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationConfig {
    pub kind: Relaxation,
    pub steps: usize,
}

impl RelaxationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("smoothing steps must be at least 1".into()));
        }
        if let Relaxation::WeightedJacobi { omega } = self.kind {
            if !(omega > 0.0 && omega <= 1.0) {
                return Err(Error::Config(format!("Jacobi weight {omega} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Approximate solution of `A w = b` from `w = 0` with the configured smoother.
pub fn smooth(a: &CsrMatrix<c64>, b: &[c64], cfg: RelaxationConfig) -> Result<Vec<c64>> {
    let mut x = vec![c64::default(); b.len()];
    match cfg.kind {
        Relaxation::WeightedJacobi { omega } => weighted_jacobi_sweep(a, b, &mut x, omega, cfg.steps)?,
        Relaxation::GaussSeidel => gauss_seidel_sweep(a, b, &mut x, cfg.steps)?,
        Relaxation::Gmres => x = gmres(a, b, None, GmresOptions::steps(cfg.steps), None)?.x,
    }
    Ok(x)
}

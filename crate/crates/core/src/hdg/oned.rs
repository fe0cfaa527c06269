//! One-dimensional HDG for `i k q + u' = 0`, `i k u + q' = f` on an interval.
//!
//! Traces are point values at the mesh nodes. The skeleton inner product
//! counts an interior node once per adjacent element, so the operator form
//! is `A = S / 2` on interior rows.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as c64;

use super::SkeletonSystem;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::quadrature::gauss_legendre;
use crate::sparse::{BlockDiagonal, CsrMatrix};

/// Boundary treatment for the 1D skeleton system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary1D {
    /// Impedance condition `-q.n + u = g`.
    Robin,
    /// Homogeneous Dirichlet condition; boundary nodes are removed.
    Dirichlet,
    /// The last node is identified with the first.
    Periodic,
}

/// Condensed local solver on one interval of length `h`.
#[derive(Debug, Clone)]
pub struct Local1D {
    pub p: usize,
    pub tau: f64,
    /// `S_T[i, j] = -Qhat_j . n` at endpoint `i` (0 = left, 1 = right).
    pub condensed: [[c64; 2]; 2],
    k: DMatrix<c64>,
    r: DMatrix<c64>,
    h: f64,
}

fn monomials(p: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
    // basis (2s - 1)^a on the unit interval, derivatives w.r.t. s
    let y = 2.0 * s - 1.0;
    let v = (0..=p).map(|a| y.powi(a as i32)).collect();
    let d = (0..=p).map(|a| if a == 0 { 0.0 } else { 2.0 * a as f64 * y.powi(a as i32 - 1) }).collect();
    (v, d)
}

impl Local1D {
    pub fn new(kappa: f64, h: f64, p: usize, tau: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::UnsupportedDegree(p));
        }
        let n = p + 1;
        let ik = c64::new(0.0, kappa);
        let (xs, ws) = gauss_legendre(p + 2);
        let mut mass = DMatrix::<f64>::zeros(n, n);
        // grad[(i, j)] = (phi_j, phi_i')
        let mut grad = DMatrix::<f64>::zeros(n, n);
        for (&s, &w) in xs.iter().zip(&ws) {
            let (v, d) = monomials(p, s);
            for i in 0..n {
                for j in 0..n {
                    mass[(i, j)] += w * h * v[i] * v[j];
                    grad[(i, j)] += w * v[j] * d[i];
                }
            }
        }
        let (v0, _) = monomials(p, 0.0);
        let (v1, _) = monomials(p, 1.0);
        let mut k = DMatrix::<c64>::zeros(2 * n, 2 * n);
        let mut r = DMatrix::<c64>::zeros(2 * n, 2);
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] = ik * mass[(i, j)];
                k[(i, n + j)] = c64::from(-grad[(i, j)]);
                k[(n + i, j)] = c64::from(-grad[(i, j)] + v1[i] * v1[j] - v0[i] * v0[j]);
                k[(n + i, n + j)] = ik * mass[(i, j)] + tau * (v0[i] * v0[j] + v1[i] * v1[j]);
            }
            r[(i, 0)] = c64::from(v0[i]);
            r[(i, 1)] = c64::from(-v1[i]);
            r[(n + i, 0)] = c64::from(tau * v0[i]);
            r[(n + i, 1)] = c64::from(tau * v1[i]);
        }
        let x = k.clone().lu().solve(&r).ok_or(Error::SingularLocal { element: 0, tau })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularLocal { element: 0, tau });
        }
        let mut condensed = [[c64::default(); 2]; 2];
        for j in 0..2 {
            let fl = Self::fluxes(n, tau, &v0, &v1, &x.column(j).into_owned(), [f64::from(j == 0), f64::from(j == 1)]);
            condensed[0][j] = -fl[0];
            condensed[1][j] = -fl[1];
        }
        Ok(Self { p, tau, condensed, k, r, h })
    }

    /// Outward fluxes `Qhat . n` at the left and right endpoint.
    fn fluxes(n: usize, tau: f64, v0: &[f64], v1: &[f64], x: &DVector<c64>, lam: [f64; 2]) -> [c64; 2] {
        let ev = |off: usize, v: &[f64]| (0..n).map(|a| x[off + a] * v[a]).sum::<c64>();
        let (q0, q1, u0, u1) = (ev(0, v0), ev(0, v1), ev(n, v0), ev(n, v1));
        [-q0 + tau * (u0 - lam[0]), q1 + tau * (u1 - lam[1])]
    }

    /// Outward fluxes produced by a source on the interval `[a, a + h]`
    /// with zero trace data.
    pub fn source_fluxes(&self, a: f64, f: &dyn Fn(f64) -> c64) -> [c64; 2] {
        let n = self.p + 1;
        let (xs, ws) = gauss_legendre(self.p + 4);
        let mut load = DVector::<c64>::zeros(2 * n);
        for (&s, &w) in xs.iter().zip(&ws) {
            let fx = f(a + s * self.h);
            let (v, _) = monomials(self.p, s);
            for i in 0..n {
                load[n + i] += fx * (w * self.h * v[i]);
            }
        }
        let x = self.k.clone().lu().solve(&load).expect("local matrix is nonsingular");
        let (v0, _) = monomials(self.p, 0.0);
        let (v1, _) = monomials(self.p, 1.0);
        Self::fluxes(n, self.tau, &v0, &v1, &x, [0.0, 0.0])
    }

    /// `(Q, U)` in the local basis for endpoint traces `lambda`.
    pub fn solve_trace(&self, lambda: [c64; 2]) -> DVector<c64> {
        let lam = DVector::from_vec(lambda.to_vec());
        self.k.clone().lu().solve(&(&self.r * lam)).expect("local matrix is nonsingular")
    }
}

/// Skeleton node carried by each unknown.
pub fn dof_nodes(mesh: &Mesh1D, boundary: Boundary1D) -> Vec<usize> {
    let nn = mesh.n_nodes();
    match boundary {
        Boundary1D::Robin => (0..nn).collect(),
        Boundary1D::Dirichlet => (1..nn - 1).collect(),
        Boundary1D::Periodic => (0..nn - 1).collect(),
    }
}

/// Assembles the 1D Helmholtz skeleton system with constant wavenumber.
/// `g` holds the impedance data at the left and right end (Robin only).
pub fn assemble_1d(
    mesh: &Mesh1D,
    kappa: f64,
    p: usize,
    boundary: Boundary1D,
    f: &dyn Fn(f64) -> c64,
    g: [c64; 2],
) -> Result<SkeletonSystem> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Config(format!("wavenumber must be positive, got {kappa}")));
    }
    let ne = mesh.n_elements();
    if boundary == Boundary1D::Periodic && ne < 2 {
        return Err(Error::InvalidMesh("periodic grid needs at least two elements".into()));
    }
    let h = mesh.h();
    let local = Local1D::new(kappa, h, p, p as f64 / (kappa * h))?;
    let nn = mesh.n_nodes();
    let nodes = dof_nodes(mesh, boundary);
    let mut index = vec![None; nn];
    for (k, &v) in nodes.iter().enumerate() {
        index[v] = Some(k);
    }
    if boundary == Boundary1D::Periodic {
        index[nn - 1] = Some(0);
    }
    let n = nodes.len();
    let mut trip = Vec::with_capacity(4 * ne + 2);
    let mut load = vec![c64::default(); n];
    for e in 0..ne {
        let ends = [index[e], index[e + 1]];
        let src = local.source_fluxes(mesh.node(e), f);
        for a in 0..2 {
            let Some(i) = ends[a] else { continue };
            load[i] += src[a];
            for b in 0..2 {
                if let Some(j) = ends[b] {
                    trip.push((i, j, local.condensed[a][b]));
                }
            }
        }
    }
    let mut weights = vec![2.0; n];
    if boundary == Boundary1D::Robin {
        for (end, k) in [(0, 0), (1, n - 1)] {
            trip.push((k, k, c64::from(1.0)));
            load[k] += g[end];
            weights[k] = 1.0;
        }
    }
    let galerkin = CsrMatrix::from_triplets(n, n, trip);
    galerkin.check_finite("1D skeleton matrix")?;
    let mass = BlockDiagonal::new(weights.iter().map(|&w| DMatrix::from_element(1, 1, w)).collect())?;
    let operator = mass.solve_matrix(&galerkin);
    let mut rhs = vec![c64::default(); n];
    mass.solve(&load, &mut rhs);
    Ok(SkeletonSystem {
        level: mesh.level(),
        p,
        galerkin,
        operator,
        load,
        rhs,
        mass,
        kappa_h_over_p: kappa * h / p as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_condensed_matrix_is_symmetric() {
        for p in 1..=3 {
            let l = Local1D::new(7.0, 0.2, p, p as f64 / 1.4).unwrap();
            assert!((l.condensed[0][1] - l.condensed[1][0]).norm() < 1e-12);
            assert!((l.condensed[0][0] - l.condensed[1][1]).norm() < 1e-12);
        }
    }

    #[test]
    fn periodic_system_is_circulant() {
        let mesh = Mesh1D::new(0.0, 1.0, 8, 0).unwrap();
        let sys = assemble_1d(&mesh, 4.0, 1, Boundary1D::Periodic, &|_| c64::default(), [c64::default(); 2]).unwrap();
        assert_eq!(sys.dim(), 8);
        let d = sys.operator.get(0, 0);
        let o = sys.operator.get(0, 1);
        for i in 0..8 {
            assert!((sys.operator.get(i, i) - d).norm() < 1e-13);
            assert!((sys.operator.get(i, (i + 1) % 8) - o).norm() < 1e-13);
            assert!((sys.operator.get(i, (i + 7) % 8) - o).norm() < 1e-13);
        }
    }
}

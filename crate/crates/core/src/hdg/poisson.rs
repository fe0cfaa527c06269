use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as c64;

use super::assemble::{element_dofs, LocalCache};
use super::local::{local_load, LocalCoefficients, LocalElementOperator, TriangleGeometry};
use super::{ElementFields, InteriorSolution};
use crate::basis::Lagrange1D;
use crate::error::{Error, Result};
use crate::mesh::Mesh2D;
use crate::sparse::CsrMatrix;

/// HDG discretization of `-Laplace u = f`, `u = g` on the boundary, with
/// `tau = 1 / h_T`.
///
/// The condensed form equals the energy form
/// `(Q_lambda, Q_mu) + tau <U_lambda - lambda, U_mu - mu>_{dT_h}`.
#[derive(Debug, Clone)]
pub struct PoissonSystem {
    pub p: usize,
    /// Condensed matrix on all skeleton dofs.
    pub matrix: CsrMatrix<f64>,
    /// Free (non-boundary) dofs, ascending.
    pub free: Vec<usize>,
    /// Condensed matrix restricted to the free dofs.
    pub reduced: CsrMatrix<f64>,
    /// Right-hand side on the free dofs, including the lifted boundary data.
    pub load: Vec<f64>,
    /// Nodal boundary values on every skeleton dof (zero on free dofs).
    pub boundary_values: Vec<f64>,
    locals: Vec<Arc<LocalElementOperator<f64>>>,
    geometry: Vec<TriangleGeometry>,
    dofs: Vec<Vec<usize>>,
}

pub fn assemble_poisson(
    mesh: &Mesh2D,
    p: usize,
    f: &dyn Fn([f64; 2]) -> f64,
    g: &dyn Fn([f64; 2]) -> f64,
) -> Result<PoissonSystem> {
    if p == 0 {
        return Err(Error::UnsupportedDegree(p));
    }
    let np1 = p + 1;
    let n = mesh.n_edges() * np1;
    let dofs: Vec<Vec<usize>> = (0..mesh.n_triangles()).map(|t| element_dofs(mesh, t, p)).collect();
    let mut matrix = CsrMatrix::<f64>::from_block_pattern(n, &dofs);
    let mut full_load = vec![0.0; n];
    let mut cache = LocalCache::<f64>::default();
    let mut locals = Vec::with_capacity(dofs.len());
    let mut geometry = Vec::with_capacity(dofs.len());
    for (t, d) in dofs.iter().enumerate() {
        let geom = TriangleGeometry::from_mesh(mesh, t);
        let tau = 1.0 / geom.diameter();
        let coeffs = LocalCoefficients { flux_mass: 1.0, scalar_mass: 0.0, tau };
        let op = cache.get(&geom, p, tau, coeffs).map_err(|e| match e {
            Error::SingularLocal { tau, .. } => Error::SingularLocal { element: t, tau },
            e => e,
        })?;
        for (a, &i) in d.iter().enumerate() {
            for (b, &j) in d.iter().enumerate() {
                matrix.add_to(i, j, op.condensed[(a, b)]);
            }
        }
        let fl = local_load(&geom, p, f);
        let bt = &op.blocks.b * op.solve_load(&fl);
        for (a, &i) in d.iter().enumerate() {
            full_load[i] += bt[a];
        }
        locals.push(op);
        geometry.push(geom);
    }

    let nodes = Lagrange1D::lobatto(p);
    let mut boundary_values = vec![0.0; n];
    let mut is_free = vec![true; n];
    for e in (0..mesh.n_edges()).filter(|&e| mesh.is_boundary_edge(e)) {
        let [a, b] = mesh.edge_coords(e);
        for (k, &s) in nodes.nodes().iter().enumerate() {
            boundary_values[e * np1 + k] = g([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            is_free[e * np1 + k] = false;
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| is_free[i]).collect();
    let lift = matrix.mul_vec(&boundary_values);
    let load = free.iter().map(|&i| full_load[i] - lift[i]).collect();
    let reduced = restrict(&matrix, &free);
    Ok(PoissonSystem { p, matrix, free, reduced, load, boundary_values, locals, geometry, dofs })
}

fn restrict(m: &CsrMatrix<f64>, free: &[usize]) -> CsrMatrix<f64> {
    let mut map = vec![usize::MAX; m.nrows()];
    for (k, &i) in free.iter().enumerate() {
        map[i] = k;
    }
    let mut trip = Vec::new();
    for (r, &i) in free.iter().enumerate() {
        let (cols, vals) = m.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            let c = map[c as usize];
            if c != usize::MAX {
                trip.push((r, c, v));
            }
        }
    }
    CsrMatrix::from_triplets(free.len(), free.len(), trip)
}

impl PoissonSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Extends a vector on the free dofs by zero.
    pub fn extend(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (&i, &v) in self.free.iter().zip(x) {
            out[i] = v;
        }
        out
    }

    /// Local `(Q, U)` of trace data `lambda` on element `t`.
    fn local_fields(&self, t: usize, lambda: &[f64]) -> DVector<f64> {
        let lam = DVector::from_iterator(self.dofs[t].len(), self.dofs[t].iter().map(|&i| lambda[i]));
        self.locals[t].solve_trace(&lam)
    }

    /// `a(lambda, lambda) = sum_T (Q, Q)_T + tau ||U - lambda||^2_{dT}` evaluated
    /// element by element from the local solutions.
    pub fn energy(&self, lambda: &[f64]) -> f64 {
        let mut total = 0.0;
        for t in 0..self.locals.len() {
            let op = &self.locals[t];
            let bl = &op.blocks;
            let nw = bl.n_w;
            let lam = DVector::from_iterator(self.dofs[t].len(), self.dofs[t].iter().map(|&i| lambda[i]));
            let x = op.solve_trace(&lam);
            let u = x.rows(2 * nw, nw);
            for c in 0..2 {
                let q = x.rows(c * nw, nw);
                total += q.dot(&(&bl.volume_mass * q));
            }
            let uu = u.dot(&(&bl.boundary_mass * u));
            let ul = u.dot(&(&bl.trace_scalar * &lam));
            let ll = lam.dot(&(&bl.edge_mass * &lam));
            total += bl.tau * (uu - 2.0 * ul + ll);
        }
        total
    }

    /// Dense energy matrix on the free dofs.
    pub fn energy_matrix(&self) -> DMatrix<f64> {
        self.reduced.to_dense()
    }

    /// Element fields for trace data `lambda` with zero source.
    pub fn recover(&self, lambda: &[f64]) -> InteriorSolution {
        let elements = (0..self.locals.len())
            .map(|t| {
                let x = self.local_fields(t, lambda);
                let nw = self.locals[t].n_w();
                let to_c = |r: std::ops::Range<usize>| r.map(|i| c64::from(x[i])).collect::<Vec<_>>();
                ElementFields { geometry: self.geometry[t], q: [to_c(0..nw), to_c(nw..2 * nw)], u: to_c(2 * nw..3 * nw) }
            })
            .collect();
        InteriorSolution { p: self.p, elements }
    }
}

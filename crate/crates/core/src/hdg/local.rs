use nalgebra::{ComplexField, DMatrix, DVector, Dyn, LU};

use crate::basis::{Lagrange1D, ScaledMonomials};
use crate::error::{Error, Result};
use crate::mesh::Mesh2D;
use crate::quadrature::{gauss_legendre, TriangleRule};

/// Element vertices (counter-clockwise) and, for each local edge `k` (from
/// vertex `k` to vertex `k + 1`), its endpoints in the orientation of the
/// global trace basis.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub element: usize,
    pub vertices: [[f64; 2]; 3],
    pub edges: [[[f64; 2]; 2]; 3],
}

impl TriangleGeometry {
    pub fn from_mesh(mesh: &Mesh2D, t: usize) -> Self {
        let vertices = mesh.triangle_coords(t);
        let te = mesh.triangle_edges(t);
        let edges = [0, 1, 2].map(|k| mesh.edge_coords(te[k].0));
        Self { element: t, vertices, edges }
    }

    pub fn centroid(&self) -> [f64; 2] {
        let v = &self.vertices;
        [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0]
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
    }

    /// `h_T = diam(T)`.
    pub fn diameter(&self) -> f64 {
        (0..3)
            .map(|k| {
                let (a, b) = (self.vertices[k], self.vertices[(k + 1) % 3]);
                ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn outward_normal(&self, k: usize) -> [f64; 2] {
        let (a, b) = (self.vertices[k], self.vertices[(k + 1) % 3]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = (dx * dx + dy * dy).sqrt();
        [dy / len, -dx / len]
    }

    pub fn edge_length(&self, k: usize) -> f64 {
        let [a, b] = self.edges[k];
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let v = &self.vertices;
        [
            v[0][0] + xi[0] * (v[1][0] - v[0][0]) + xi[1] * (v[2][0] - v[0][0]),
            v[0][1] + xi[0] * (v[1][1] - v[0][1]) + xi[1] * (v[2][1] - v[0][1]),
        ]
    }

    /// Element basis used for `V(T)` components and `W(T)`.
    pub fn basis(&self, p: usize) -> ScaledMonomials {
        ScaledMonomials::new(p, self.centroid(), self.diameter())
    }

    /// Quadrature points and weights on the element, exact for degree `deg`.
    pub fn volume_rule(&self, deg: usize) -> Vec<([f64; 2], f64)> {
        let rule = TriangleRule::with_degree(deg);
        let det = 2.0 * self.area();
        rule.points.iter().zip(&rule.weights).map(|(xi, w)| (self.map(*xi), w * det)).collect()
    }

    /// Volume quadrature independent of the vertex order, for non-polynomial data.
    pub fn symmetric_volume_rule(&self, deg: usize) -> Vec<([f64; 2], f64)> {
        let rule = TriangleRule::symmetric(deg);
        let det = 2.0 * self.area();
        rule.points.iter().zip(&rule.weights).map(|(xi, w)| (self.map(*xi), w * det)).collect()
    }

    /// Quadrature on local edge `k`: (point, weight, edge parameter).
    pub fn edge_rule(&self, k: usize, npts: usize) -> Vec<([f64; 2], f64, f64)> {
        let (s, w) = gauss_legendre(npts);
        let [a, b] = self.edges[k];
        let len = self.edge_length(k);
        s.iter()
            .zip(&w)
            .map(|(&s, &w)| ([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])], w * len, s))
            .collect()
    }
}

/// Coefficients of the local saddle problem: the mass coefficient in the
/// flux equation (`i k` for Helmholtz, `1` for Poisson), the mass coefficient
/// in the scalar equation (`i k`, resp. `0`), and the stabilization `tau`.
#[derive(Debug, Clone, Copy)]
pub struct LocalCoefficients<T> {
    pub flux_mass: T,
    pub scalar_mass: T,
    pub tau: f64,
}

/// Dense blocks of the local problem on one element.
///
/// Unknown ordering is `(Q_x, Q_y, U)` in the element basis; traces are
/// ordered edge by edge with `p + 1` Gauss–Lobatto nodal values each. With
/// `X = (Q, U)` the local equations read `K X = R lambda + F`, and the flux
/// moments are `<Qhat . n, mu_k> = (B X - C lambda)_k`.
#[derive(Debug, Clone)]
pub struct LocalBlocks<T: nalgebra::Scalar> {
    pub p: usize,
    pub n_w: usize,
    pub tau: f64,
    pub k: DMatrix<T>,
    pub r: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    /// `(phi_j, phi_i)_T` for the scalar basis.
    pub volume_mass: DMatrix<f64>,
    /// `<phi_j, phi_i>_{dT}`.
    pub boundary_mass: DMatrix<f64>,
    /// `<mu_k, phi_i>_{dT}`, shape `n_w x n_trace`.
    pub trace_scalar: DMatrix<f64>,
    /// `<mu_l, mu_k>` on each edge, block diagonal.
    pub edge_mass: DMatrix<f64>,
}

impl<T: nalgebra::Scalar> LocalBlocks<T> {
    pub fn n_trace(&self) -> usize {
        3 * (self.p + 1)
    }

    pub fn n_local(&self) -> usize {
        3 * self.n_w
    }
}

/// Assembles the local blocks with quadrature exact for degree `2p + 2`.
pub fn local_blocks<T>(geom: &TriangleGeometry, p: usize, coeffs: LocalCoefficients<T>) -> LocalBlocks<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let basis = geom.basis(p);
    let nw = basis.len();
    let np1 = p + 1;
    let nt = 3 * np1;
    let tau = coeffs.tau;
    let trace = Lagrange1D::lobatto(p);

    let mut mass = DMatrix::<f64>::zeros(nw, nw);
    // grad[c][(i, j)] = (phi_j, d_c phi_i)
    let mut grad = [DMatrix::<f64>::zeros(nw, nw), DMatrix::<f64>::zeros(nw, nw)];
    let mut vals = vec![0.0; nw];
    let mut grads = vec![[0.0; 2]; nw];
    for (x, w) in geom.volume_rule(2 * p + 2) {
        basis.eval(x, &mut vals, &mut grads);
        for i in 0..nw {
            for j in 0..nw {
                mass[(i, j)] += w * vals[i] * vals[j];
                grad[0][(i, j)] += w * vals[j] * grads[i][0];
                grad[1][(i, j)] += w * vals[j] * grads[i][1];
            }
        }
    }

    let mut bmass = DMatrix::<f64>::zeros(nw, nw);
    // bnormal[c][(i, j)] = <phi_j n_c, phi_i>
    let mut bnormal = [DMatrix::<f64>::zeros(nw, nw), DMatrix::<f64>::zeros(nw, nw)];
    // tnormal[c][(i, k)] = <mu_k, phi_i n_c>, tscalar[(i, k)] = <mu_k, phi_i>
    let mut tnormal = [DMatrix::<f64>::zeros(nw, nt), DMatrix::<f64>::zeros(nw, nt)];
    let mut tscalar = DMatrix::<f64>::zeros(nw, nt);
    let mut emass = DMatrix::<f64>::zeros(nt, nt);
    for e in 0..3 {
        let n = geom.outward_normal(e);
        for (x, w, s) in geom.edge_rule(e, p + 2) {
            basis.eval(x, &mut vals, &mut grads);
            let mu = trace.eval(s);
            for i in 0..nw {
                for j in 0..nw {
                    let v = w * vals[i] * vals[j];
                    bmass[(i, j)] += v;
                    bnormal[0][(i, j)] += v * n[0];
                    bnormal[1][(i, j)] += v * n[1];
                }
                for k in 0..np1 {
                    let v = w * vals[i] * mu[k];
                    tscalar[(i, e * np1 + k)] += v;
                    tnormal[0][(i, e * np1 + k)] += v * n[0];
                    tnormal[1][(i, e * np1 + k)] += v * n[1];
                }
            }
            for k in 0..np1 {
                for l in 0..np1 {
                    emass[(e * np1 + k, e * np1 + l)] += w * mu[k] * mu[l];
                }
            }
        }
    }

    let re = |x: f64| T::from_real(x);
    let n = 3 * nw;
    let mut k = DMatrix::<T>::zeros(n, n);
    let mut r = DMatrix::<T>::zeros(n, nt);
    let mut b = DMatrix::<T>::zeros(nt, n);
    for c in 0..2 {
        let (ro, co) = (c * nw, c * nw);
        for i in 0..nw {
            for j in 0..nw {
                // flux equation, test psi_i e_c
                k[(ro + i, co + j)] = coeffs.flux_mass * re(mass[(i, j)]);
                k[(ro + i, 2 * nw + j)] = re(-grad[c][(i, j)]);
                // scalar equation, test phi_i
                k[(2 * nw + i, co + j)] = re(-grad[c][(i, j)] + bnormal[c][(i, j)]);
            }
            for t in 0..nt {
                r[(ro + i, t)] = re(-tnormal[c][(i, t)]);
                b[(t, co + i)] = re(tnormal[c][(i, t)]);
            }
        }
    }
    for i in 0..nw {
        for j in 0..nw {
            k[(2 * nw + i, 2 * nw + j)] = coeffs.scalar_mass * re(mass[(i, j)]) + re(tau * bmass[(i, j)]);
        }
        for t in 0..nt {
            r[(2 * nw + i, t)] = re(tau * tscalar[(i, t)]);
            b[(t, 2 * nw + i)] = re(tau * tscalar[(i, t)]);
        }
    }
    let c = emass.map(|v| re(tau * v));
    LocalBlocks {
        p,
        n_w: nw,
        tau,
        k,
        r,
        b,
        c,
        volume_mass: mass,
        boundary_mass: bmass,
        trace_scalar: tscalar,
        edge_mass: emass,
    }
}

/// Factored local problem with the trace-to-(Q, U) map and the condensed
/// element matrix `S_T = C - B K^{-1} R`, i.e. `-<Qhat_lambda . n, mu>_{dT}`.
#[derive(Debug, Clone)]
pub struct LocalElementOperator<T: ComplexField<RealField = f64> + Copy> {
    pub element: usize,
    pub tau: f64,
    pub blocks: LocalBlocks<T>,
    lu: LU<T, Dyn, Dyn>,
    /// `K^{-1} R`, columns are `(Q, U)` for unit trace data.
    pub lambda_map: DMatrix<T>,
    pub condensed: DMatrix<T>,
}

fn all_finite<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>) -> bool {
    m.iter().all(|v| v.real().is_finite() && v.imaginary().is_finite())
}

pub fn build_local_operator<T>(
    geom: &TriangleGeometry,
    p: usize,
    coeffs: LocalCoefficients<T>,
) -> Result<LocalElementOperator<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let blocks = local_blocks(geom, p, coeffs);
    let singular = || Error::SingularLocal { element: geom.element, tau: coeffs.tau };
    let lu = blocks.k.clone().lu();
    let lambda_map = lu.solve(&blocks.r).ok_or_else(singular)?;
    if !all_finite(&lambda_map) {
        return Err(singular());
    }
    let condensed = &blocks.c - &blocks.b * &lambda_map;
    Ok(LocalElementOperator { element: geom.element, tau: coeffs.tau, blocks, lu, lambda_map, condensed })
}

impl<T: ComplexField<RealField = f64> + Copy> LocalElementOperator<T> {
    /// `(Q_lambda, U_lambda)` for local trace data.
    pub fn solve_trace(&self, lambda: &DVector<T>) -> DVector<T> {
        &self.lambda_map * lambda
    }

    /// `(Q_f, U_f)` for a local load vector.
    pub fn solve_load(&self, load: &DVector<T>) -> DVector<T> {
        self.lu.solve(load).expect("local matrix was factored successfully")
    }

    /// Moments `<Qhat . n, mu_k>_{dT}` of the numerical flux of `(Q, U)`
    /// with trace `lambda`.
    pub fn flux_moments(&self, x: &DVector<T>, lambda: &DVector<T>) -> DVector<T> {
        &self.blocks.b * x - &self.blocks.c * lambda
    }

    pub fn n_w(&self) -> usize {
        self.blocks.n_w
    }
}

/// Load vector `(f, phi_i)_T` placed in the scalar rows.
pub(crate) fn local_load<T>(geom: &TriangleGeometry, p: usize, f: &dyn Fn([f64; 2]) -> T) -> DVector<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let basis = geom.basis(p);
    let nw = basis.len();
    let mut out = DVector::<T>::zeros(3 * nw);
    // the data is not polynomial, so integrate more accurately than the bilinear forms
    for (x, w) in geom.symmetric_volume_rule(2 * p + 6) {
        let fx = f(x);
        for (i, v) in basis.values(x).into_iter().enumerate() {
            out[2 * nw + i] += fx * T::from_real(w * v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as c64;

    fn reference_triangle() -> TriangleGeometry {
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        TriangleGeometry { element: 0, vertices: v, edges: [[v[0], v[1]], [v[2], v[1]], [v[0], v[2]]] }
    }

    fn helmholtz(kappa: f64, p: usize, h: f64) -> LocalCoefficients<c64> {
        let ik = c64::new(0.0, kappa);
        LocalCoefficients { flux_mass: ik, scalar_mass: ik, tau: p as f64 / (kappa * h) }
    }

    #[test]
    fn zero_trace_gives_zero_fields() {
        let g = reference_triangle();
        let op = build_local_operator(&g, 2, helmholtz(3.0, 2, g.diameter())).unwrap();
        let x = op.solve_trace(&DVector::zeros(9));
        assert!(x.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn random_trace_satisfies_local_equations() {
        let g = reference_triangle();
        let op = build_local_operator(&g, 2, helmholtz(5.0, 2, g.diameter())).unwrap();
        let lambda = DVector::from_fn(9, |i, _| c64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()));
        let x = op.solve_trace(&lambda);
        let res = &op.blocks.k * &x - &op.blocks.r * &lambda;
        let scale = (&op.blocks.r * &lambda).norm();
        assert!(res.norm() <= 1e-11 * scale);
    }

    #[test]
    fn poisson_linear_trace_is_reproduced() {
        let g = reference_triangle();
        let coeffs = LocalCoefficients { flux_mass: 1.0, scalar_mass: 0.0, tau: 1.0 / g.diameter() };
        let op = build_local_operator(&g, 1, coeffs).unwrap();
        let v = |x: [f64; 2]| 0.3 + 2.0 * x[0] - 1.5 * x[1];
        let lambda = DVector::from_fn(6, |i, _| {
            let [a, b] = g.edges[i / 2];
            let s = (i % 2) as f64;
            v([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
        });
        let x = op.solve_trace(&lambda);
        let basis = g.basis(1);
        let pt = [0.2, 0.3];
        let phi = basis.values(pt);
        let u: f64 = (0..3).map(|j| x[6 + j] * phi[j]).sum();
        let qx: f64 = (0..3).map(|j| x[j] * phi[j]).sum();
        let qy: f64 = (0..3).map(|j| x[3 + j] * phi[j]).sum();
        assert!((u - v(pt)).abs() < 1e-12);
        assert!((qx + 2.0).abs() < 1e-12 && (qy - 1.5).abs() < 1e-12);
    }
}

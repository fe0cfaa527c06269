use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64 as c64;

use super::local::{build_local_operator, local_load, LocalCoefficients, LocalElementOperator, TriangleGeometry};
use super::{HelmholtzProblem, SkeletonSystem};
use crate::basis::Lagrange1D;
use crate::error::{Error, Result};
use crate::mesh::Mesh2D;
use crate::quadrature::gauss_legendre;
use crate::sparse::{BlockDiagonal, CsrMatrix};

pub(crate) fn helmholtz_coefficients(kappa: f64, p: usize, h: f64) -> LocalCoefficients<c64> {
    let ik = c64::new(0.0, kappa);
    LocalCoefficients { flux_mass: ik, scalar_mass: ik, tau: p as f64 / (kappa * h) }
}

fn wavenumber_at(problem: &HelmholtzProblem, geom: &TriangleGeometry) -> Result<f64> {
    let k = (problem.wavenumber)(geom.centroid());
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Config(format!("wavenumber must be positive, got {k} on element {}", geom.element)));
    }
    Ok(k)
}

/// Local solver for triangle `t` of `mesh`.
pub fn local_operator_for(mesh: &Mesh2D, t: usize, problem: &HelmholtzProblem) -> Result<LocalElementOperator<c64>> {
    let geom = TriangleGeometry::from_mesh(mesh, t);
    let kappa = wavenumber_at(problem, &geom)?;
    build_local_operator(&geom, problem.p, helmholtz_coefficients(kappa, problem.p, geom.diameter()))
}

/// Local operators depend on the element only through its shape, the trace
/// orientation and the coefficients, so translated copies share one factorization.
pub(crate) struct LocalCache<T: ComplexField<RealField = f64> + Copy> {
    map: HashMap<Vec<i64>, Arc<LocalElementOperator<T>>>,
}

impl<T: ComplexField<RealField = f64> + Copy> Default for LocalCache<T> {
    fn default() -> Self {
        Self { map: HashMap::new() }
    }
}

impl<T: ComplexField<RealField = f64> + Copy> LocalCache<T> {
    fn key(geom: &TriangleGeometry, coefficient: f64) -> Vec<i64> {
        let o = geom.vertices[0];
        let q = |x: [f64; 2]| [((x[0] - o[0]) * 1e12).round() as i64, ((x[1] - o[1]) * 1e12).round() as i64];
        let mut key = Vec::with_capacity(17);
        for v in &geom.vertices[1..] {
            key.extend(q(*v));
        }
        for e in &geom.edges {
            key.extend(q(e[0]));
            key.extend(q(e[1]));
        }
        key.push(coefficient.to_bits() as i64);
        key
    }

    /// `coefficient` identifies `coeffs` among elements of the same shape.
    pub(crate) fn get(
        &mut self,
        geom: &TriangleGeometry,
        p: usize,
        coefficient: f64,
        coeffs: LocalCoefficients<T>,
    ) -> Result<Arc<LocalElementOperator<T>>> {
        let key = Self::key(geom, coefficient);
        if let Some(op) = self.map.get(&key) {
            return Ok(op.clone());
        }
        let op = Arc::new(build_local_operator(geom, p, coeffs)?);
        self.map.insert(key, op.clone());
        Ok(op)
    }

    pub(crate) fn helmholtz(
        &mut self,
        geom: &TriangleGeometry,
        p: usize,
        kappa: f64,
    ) -> Result<Arc<LocalElementOperator<T>>>
    where
        T: From<c64>,
    {
        let c = helmholtz_coefficients(kappa, p, geom.diameter());
        let coeffs = LocalCoefficients { flux_mass: T::from(c.flux_mass), scalar_mass: T::from(c.scalar_mass), tau: c.tau };
        self.get(geom, p, kappa, coeffs)
    }
}

pub(crate) fn element_dofs(mesh: &Mesh2D, t: usize, p: usize) -> Vec<usize> {
    let np1 = p + 1;
    mesh.triangle_edges(t).iter().flat_map(|&(e, _)| (0..np1).map(move |j| e * np1 + j)).collect()
}

/// `<mu_l, mu_k>` on an edge of unit length.
pub(crate) fn reference_edge_mass(p: usize) -> DMatrix<f64> {
    let basis = Lagrange1D::lobatto(p);
    let (s, w) = gauss_legendre(p + 2);
    let mut m = DMatrix::zeros(p + 1, p + 1);
    for (&s, &w) in s.iter().zip(&w) {
        let v = basis.eval(s);
        for i in 0..=p {
            for j in 0..=p {
                m[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    m
}

fn edge_length(mesh: &Mesh2D, e: usize) -> f64 {
    let [a, b] = mesh.edge_coords(e);
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

/// Skeleton mass with interior edges counted once per adjacent element.
pub fn skeleton_mass(mesh: &Mesh2D, p: usize) -> Result<BlockDiagonal> {
    let m0 = reference_edge_mass(p);
    let blocks = (0..mesh.n_edges())
        .map(|e| {
            let mult = if mesh.is_boundary_edge(e) { 1.0 } else { 2.0 };
            &m0 * (mult * edge_length(mesh, e))
        })
        .collect();
    BlockDiagonal::new(blocks)
}

/// Outward normal of a boundary edge.
pub(crate) fn boundary_normal(mesh: &Mesh2D, e: usize) -> [f64; 2] {
    let t = mesh.edge_triangles(e).0;
    let geom = TriangleGeometry::from_mesh(mesh, t);
    let k = mesh.triangle_edges(t).iter().position(|&(f, _)| f == e).expect("edge belongs to its triangle");
    geom.outward_normal(k)
}

/// `<g, mu_k>` on boundary edge `e`.
fn boundary_load(mesh: &Mesh2D, e: usize, p: usize, g: &dyn Fn([f64; 2], [f64; 2]) -> c64) -> Vec<c64> {
    let basis = Lagrange1D::lobatto(p);
    let (s, w) = gauss_legendre(p + 4);
    let [a, b] = mesh.edge_coords(e);
    let len = edge_length(mesh, e);
    let n = boundary_normal(mesh, e);
    let mut out = vec![c64::default(); p + 1];
    for (&s, &w) in s.iter().zip(&w) {
        let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        let gx = g(x, n);
        for (k, v) in basis.eval(s).into_iter().enumerate() {
            out[k] += gx * (w * len * v);
        }
    }
    out
}

/// Assembles the condensed skeleton system of the Helmholtz problem on `mesh`.
pub fn assemble_condensed(mesh: &Mesh2D, problem: &HelmholtzProblem) -> Result<SkeletonSystem> {
    let p = problem.p;
    if p == 0 {
        return Err(Error::UnsupportedDegree(p));
    }
    let np1 = p + 1;
    let n = mesh.n_edges() * np1;
    let groups: Vec<Vec<usize>> = (0..mesh.n_triangles()).map(|t| element_dofs(mesh, t, p)).collect();
    let mut galerkin = CsrMatrix::<c64>::from_block_pattern(n, &groups);
    let mut load = vec![c64::default(); n];
    let mut cache = LocalCache::<c64>::default();
    let mut khp: f64 = 0.0;

    for (t, dofs) in groups.iter().enumerate() {
        let geom = TriangleGeometry::from_mesh(mesh, t);
        let kappa = wavenumber_at(problem, &geom)?;
        khp = khp.max(kappa * geom.diameter() / p as f64);
        let op = cache.helmholtz(&geom, p, kappa).map_err(|e| match e {
            Error::SingularLocal { tau, .. } => Error::SingularLocal { element: t, tau },
            e => e,
        })?;
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                galerkin.add_to(i, j, op.condensed[(a, b)]);
            }
        }
        let f = local_load(&geom, p, &|x| (problem.source)(x));
        if f.iter().any(|v| *v != c64::default()) {
            let bt = &op.blocks.b * op.solve_load(&f);
            for (a, &i) in dofs.iter().enumerate() {
                load[i] += bt[a];
            }
        }
    }

    let m0 = reference_edge_mass(p);
    for e in (0..mesh.n_edges()).filter(|&e| mesh.is_boundary_edge(e)) {
        let len = edge_length(mesh, e);
        for i in 0..np1 {
            for j in 0..np1 {
                galerkin.add_to(e * np1 + i, e * np1 + j, c64::from(len * m0[(i, j)]));
            }
        }
        for (k, v) in boundary_load(mesh, e, p, &*problem.boundary).into_iter().enumerate() {
            load[e * np1 + k] += v;
        }
    }
    galerkin.check_finite("condensed skeleton matrix")?;

    let mass = skeleton_mass(mesh, p)?;
    let operator = mass.solve_matrix(&galerkin);
    let mut rhs = vec![c64::default(); n];
    mass.solve(&load, &mut rhs);
    Ok(SkeletonSystem { level: mesh.level(), p, galerkin, operator, load, rhs, mass, kappa_h_over_p: khp })
}

/// Element unknowns `(Q_x, Q_y, U)` in the scaled monomial basis of one triangle.
#[derive(Debug, Clone)]
pub struct ElementFields {
    pub geometry: TriangleGeometry,
    pub q: [Vec<c64>; 2],
    pub u: Vec<c64>,
}

impl ElementFields {
    fn from_local(geometry: TriangleGeometry, x: &DVector<c64>, nw: usize) -> Self {
        Self {
            geometry,
            q: [x.rows(0, nw).iter().copied().collect(), x.rows(nw, nw).iter().copied().collect()],
            u: x.rows(2 * nw, nw).iter().copied().collect(),
        }
    }

    fn eval(&self, coeffs: &[c64], x: [f64; 2]) -> c64 {
        let p = degree_of(coeffs.len());
        let phi = self.geometry.basis(p).values(x);
        coeffs.iter().zip(phi).map(|(c, v)| c * v).sum()
    }

    pub fn u_at(&self, x: [f64; 2]) -> c64 {
        self.eval(&self.u, x)
    }

    pub fn q_at(&self, x: [f64; 2]) -> [c64; 2] {
        [self.eval(&self.q[0], x), self.eval(&self.q[1], x)]
    }
}

fn degree_of(nw: usize) -> usize {
    (0..).find(|p| (p + 1) * (p + 2) / 2 == nw).expect("basis size is triangular")
}

/// Element-wise `(q_h, u_h)` reconstructed from a skeleton solution.
#[derive(Debug, Clone)]
pub struct InteriorSolution {
    pub p: usize,
    pub elements: Vec<ElementFields>,
}

impl InteriorSolution {
    /// `u_h(x)` using the mesh to locate the element.
    pub fn u_at(&self, mesh: &Mesh2D, x: [f64; 2]) -> c64 {
        let (t, _) = mesh.locate(x);
        self.elements[t].u_at(x)
    }

    /// `||u_h - u||_{L2}`.
    pub fn l2_error_u(&self, exact: &dyn Fn([f64; 2]) -> c64) -> f64 {
        self.elements
            .iter()
            .map(|el| {
                el.geometry
                    .volume_rule(2 * self.p + 6)
                    .into_iter()
                    .map(|(x, w)| w * (el.u_at(x) - exact(x)).norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `||q_h - q||_{L2}`.
    pub fn l2_error_q(&self, exact: &dyn Fn([f64; 2]) -> [c64; 2]) -> f64 {
        self.elements
            .iter()
            .map(|el| {
                el.geometry
                    .volume_rule(2 * self.p + 6)
                    .into_iter()
                    .map(|(x, w)| {
                        let (qh, q) = (el.q_at(x), exact(x));
                        w * ((qh[0] - q[0]).norm_sqr() + (qh[1] - q[1]).norm_sqr())
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Recovers `(q_h, u_h)` from a trace solution by solving each local problem.
pub fn recover_interior(mesh: &Mesh2D, problem: &HelmholtzProblem, lambda: &[c64]) -> Result<InteriorSolution> {
    let p = problem.p;
    let expected = mesh.n_edges() * (p + 1);
    if lambda.len() != expected {
        return Err(Error::Dimension { expected, got: lambda.len(), context: "trace vector" });
    }
    let mut cache = LocalCache::<c64>::default();
    let mut elements = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let geom = TriangleGeometry::from_mesh(mesh, t);
        let kappa = wavenumber_at(problem, &geom)?;
        let op = cache.helmholtz(&geom, p, kappa)?;
        let lam = DVector::from_iterator(3 * (p + 1), element_dofs(mesh, t, p).into_iter().map(|i| lambda[i]));
        let f = local_load(&geom, p, &|x| (problem.source)(x));
        let x = op.solve_trace(&lam) + op.solve_load(&f);
        elements.push(ElementFields::from_local(geom, &x, op.n_w()));
    }
    Ok(InteriorSolution { p, elements })
}

/// Solves the full, uncondensed HDG system densely. Only meant for small
/// meshes, as an independent check of static condensation.
pub fn solve_uncondensed_reference(mesh: &Mesh2D, problem: &HelmholtzProblem) -> Result<(Vec<c64>, InteriorSolution)> {
    let p = problem.p;
    let np1 = p + 1;
    let nw = (p + 1) * (p + 2) / 2;
    let nl = 3 * nw;
    let nt = mesh.n_triangles();
    let ntrace = mesh.n_edges() * np1;
    let n = nt * nl + ntrace;
    let mut a = DMatrix::<c64>::zeros(n, n);
    let mut rhs = DVector::<c64>::zeros(n);
    let mut geoms = Vec::with_capacity(nt);
    for t in 0..nt {
        let geom = TriangleGeometry::from_mesh(mesh, t);
        let kappa = wavenumber_at(problem, &geom)?;
        let blocks = super::local::local_blocks(&geom, p, helmholtz_coefficients(kappa, p, geom.diameter()));
        let f = local_load(&geom, p, &|x| (problem.source)(x));
        let dofs = element_dofs(mesh, t, p);
        let o = t * nl;
        for i in 0..nl {
            rhs[o + i] = f[i];
            for j in 0..nl {
                a[(o + i, o + j)] = blocks.k[(i, j)];
            }
            for (b, &g) in dofs.iter().enumerate() {
                a[(o + i, nt * nl + g)] = -blocks.r[(i, b)];
            }
        }
        // trace rows: -<Qhat . n, mu> summed over elements
        for (a_, &g) in dofs.iter().enumerate() {
            for j in 0..nl {
                a[(nt * nl + g, o + j)] -= blocks.b[(a_, j)];
            }
            for (b, &h) in dofs.iter().enumerate() {
                a[(nt * nl + g, nt * nl + h)] += blocks.c[(a_, b)];
            }
        }
        geoms.push(geom);
    }
    let m0 = reference_edge_mass(p);
    for e in (0..mesh.n_edges()).filter(|&e| mesh.is_boundary_edge(e)) {
        let len = edge_length(mesh, e);
        for i in 0..np1 {
            for j in 0..np1 {
                a[(nt * nl + e * np1 + i, nt * nl + e * np1 + j)] += c64::from(len * m0[(i, j)]);
            }
        }
        for (k, v) in boundary_load(mesh, e, p, &*problem.boundary).into_iter().enumerate() {
            rhs[nt * nl + e * np1 + k] += v;
        }
    }
    let x = a.lu().solve(&rhs).ok_or(Error::SingularMatrix(0))?;
    let lambda = x.rows(nt * nl, ntrace).iter().copied().collect();
    let elements = geoms
        .into_iter()
        .enumerate()
        .map(|(t, g)| ElementFields::from_local(g, &x.rows(t * nl, nl).into_owned(), nw))
        .collect();
    Ok((lambda, InteriorSolution { p, elements }))
}

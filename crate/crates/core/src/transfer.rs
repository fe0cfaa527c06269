//! Intergrid transfer `I_l : M_l -> M_L` and its adjoint `Q_l`.
//!
//! `I_l` is applied in factored form: `W` averages coarse trace data into a
//! continuous piecewise polynomial on `T_l` (vertex values are means over the
//! incident edges, edge nodes are copied, interior nodes come from the local
//! solver), and `E` evaluates that function at the finest skeleton nodes.
//! `Q_l = M_l^{-1} I_l^H M_L` is the adjoint with respect to the skeleton
//! inner products.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as c64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::{LagrangeTriangle, Lagrange1D, NodeKind};
use crate::error::{Error, Result};
use crate::hdg::oned::{dof_nodes, Boundary1D, Local1D};
use crate::hdg::{assemble_poisson, local_operator_for, HelmholtzProblem, LocalCoefficients, TriangleGeometry};
use crate::mesh::{Mesh1D, Mesh2D, MeshHierarchy};
use crate::quadrature::gauss_lobatto_points;
use crate::sparse::{BlockDiagonal, CsrMatrix};

/// Which local solver fills element-interior nodes (`p >= 3`) and whether
/// boundary values are pinned to zero.
#[derive(Debug, Clone, Copy)]
pub enum TransferKind<'a> {
    Helmholtz(&'a HelmholtzProblem),
    /// Poisson local solver, homogeneous Dirichlet space.
    Poisson,
}

/// `I_l` and `Q_l` between level `l` and the finest level.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    pub level: usize,
    /// `None` when `l = L`.
    factors: Option<(CsrMatrix<c64>, CsrMatrix<f64>)>,
    coarse_mass: BlockDiagonal,
    fine_mass: BlockDiagonal,
}

impl TransferOperator {
    pub fn identity(level: usize, mass: BlockDiagonal) -> Self {
        Self { level, factors: None, coarse_mass: mass.clone(), fine_mass: mass }
    }

    pub fn from_factors(
        level: usize,
        w: CsrMatrix<c64>,
        e: CsrMatrix<f64>,
        coarse_mass: BlockDiagonal,
        fine_mass: BlockDiagonal,
    ) -> Result<Self> {
        if w.nrows() != e.ncols() || e.nrows() != fine_mass.dim() || w.ncols() != coarse_mass.dim() {
            return Err(Error::Dimension { expected: e.ncols(), got: w.nrows(), context: "transfer factors" });
        }
        Ok(Self { level, factors: Some((w, e)), coarse_mass, fine_mass })
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_none()
    }

    pub fn coarse_dim(&self) -> usize {
        self.coarse_mass.dim()
    }

    pub fn fine_dim(&self) -> usize {
        self.fine_mass.dim()
    }

    pub fn coarse_mass(&self) -> &BlockDiagonal {
        &self.coarse_mass
    }

    pub fn fine_mass(&self) -> &BlockDiagonal {
        &self.fine_mass
    }

    /// `I_l mu`.
    pub fn prolong(&self, mu: &[c64]) -> Vec<c64> {
        match &self.factors {
            None => mu.to_vec(),
            Some((w, e)) => e.mul_vec(&w.mul_vec(mu)),
        }
    }

    /// `Q_l v = M_l^{-1} I_l^H M_L v`.
    pub fn restrict(&self, v: &[c64]) -> Vec<c64> {
        let Some((w, e)) = &self.factors else { return v.to_vec() };
        let mut mv = vec![c64::default(); v.len()];
        self.fine_mass.apply(v, &mut mv);
        let mut ev = vec![c64::default(); e.ncols()];
        e.mul_transpose_into(&mv, &mut ev, false);
        let mut wv = vec![c64::default(); w.ncols()];
        w.mul_transpose_into(&ev, &mut wv, true);
        let mut out = vec![c64::default(); wv.len()];
        self.coarse_mass.solve(&wv, &mut out);
        out
    }

    /// Dense matrix of `I_l`; only for small levels.
    pub fn to_dense(&self) -> DMatrix<c64> {
        match &self.factors {
            None => DMatrix::identity(self.fine_dim(), self.fine_dim()),
            Some((w, e)) => e.to_dense().map(c64::from) * w.to_dense(),
        }
    }

    /// The averaging factor `W` (coarse traces to continuous nodal values).
    pub fn averaging(&self) -> Option<&CsrMatrix<c64>> {
        self.factors.as_ref().map(|f| &f.0)
    }

    /// Sparse matrix of `I_l`, formed explicitly (for export).
    pub fn matrix(&self) -> CsrMatrix<c64> {
        match &self.factors {
            None => CsrMatrix::identity(self.fine_dim()),
            Some((w, e)) => {
                let mut trip = Vec::new();
                for i in 0..e.nrows() {
                    let (ec, ev) = e.row(i);
                    for (&k, &a) in ec.iter().zip(ev) {
                        let (wc, wv) = w.row(k as usize);
                        for (&j, &b) in wc.iter().zip(wv) {
                            trip.push((i, j as usize, b * a));
                        }
                    }
                }
                CsrMatrix::from_triplets(e.nrows(), w.ncols(), trip)
            }
        }
    }
}

/// Number of continuous `P_p` Lagrange nodes on `mesh`.
pub fn continuous_dim(mesh: &Mesh2D, p: usize) -> usize {
    mesh.n_vertices() + (p - 1) * mesh.n_edges() + mesh.n_triangles() * interior_nodes(p)
}

fn interior_nodes(p: usize) -> usize {
    if p >= 3 {
        (p - 1) * (p - 2) / 2
    } else {
        0
    }
}

/// Global continuous dof of each local node of `LagrangeTriangle::new(p)` on triangle `t`.
fn continuous_dofs(mesh: &Mesh2D, lag: &LagrangeTriangle, t: usize) -> Vec<usize> {
    let p = lag.degree();
    let tri = mesh.triangles()[t];
    let te = mesh.triangle_edges(t);
    let gll = gauss_lobatto_points(p);
    let nv = mesh.n_vertices();
    let base_int = nv + (p - 1) * mesh.n_edges() + t * interior_nodes(p);
    let mut interior = 0;
    lag.kinds()
        .iter()
        .map(|kind| match *kind {
            NodeKind::Vertex(v) => tri[v],
            NodeKind::Edge { edge, s } => {
                let (ge, agrees) = te[edge];
                let k = gll.iter().position(|&g| (g - s).abs() < 1e-14).expect("edge node is a Lobatto point");
                let k = if agrees { k } else { p - k };
                nv + ge * (p - 1) + k - 1
            }
            NodeKind::Interior => {
                interior += 1;
                base_int + interior - 1
            }
        })
        .collect()
}

/// The averaging operator `W`: coarse traces to continuous nodal values.
pub fn averaging_to_continuous(mesh: &Mesh2D, p: usize, kind: TransferKind<'_>) -> Result<CsrMatrix<c64>> {
    let np1 = p + 1;
    let nv = mesh.n_vertices();
    let pinned = matches!(kind, TransferKind::Poisson);
    let mut trip: Vec<(usize, usize, c64)> = Vec::new();
    for (v, edges) in mesh.vertex_edges().iter().enumerate() {
        if pinned && mesh.is_boundary_vertex(v) {
            continue;
        }
        let wgt = 1.0 / edges.len() as f64;
        for &e in edges {
            let k = if mesh.edges()[e][0] == v { 0 } else { p };
            trip.push((v, e * np1 + k, c64::from(wgt)));
        }
    }
    for e in 0..mesh.n_edges() {
        if pinned && mesh.is_boundary_edge(e) {
            continue;
        }
        for k in 1..p {
            trip.push((nv + e * (p - 1) + k - 1, e * np1 + k, c64::from(1.0)));
        }
    }
    if p >= 3 {
        let lag = LagrangeTriangle::new(p);
        let interior: Vec<[f64; 2]> = lag
            .kinds()
            .iter()
            .zip(lag.nodes())
            .filter(|(k, _)| matches!(k, NodeKind::Interior))
            .map(|(_, x)| *x)
            .collect();
        let base = nv + (p - 1) * mesh.n_edges();
        for t in 0..mesh.n_triangles() {
            let geom = TriangleGeometry::from_mesh(mesh, t);
            let map: DMatrix<c64> = match kind {
                TransferKind::Helmholtz(prob) => local_operator_for(mesh, t, prob)?.lambda_map,
                TransferKind::Poisson => {
                    let coeffs = LocalCoefficients { flux_mass: 1.0, scalar_mass: 0.0, tau: 1.0 / geom.diameter() };
                    crate::hdg::build_local_operator(&geom, p, coeffs)?.lambda_map.map(c64::from)
                }
            };
            let basis = geom.basis(p);
            let nw = basis.len();
            let dofs: Vec<usize> = mesh.triangle_edges(t).iter().flat_map(|&(e, _)| (0..np1).map(move |j| e * np1 + j)).collect();
            for (m, xi) in interior.iter().enumerate() {
                let phi = basis.values(geom.map(*xi));
                for (a, &g) in dofs.iter().enumerate() {
                    if pinned && mesh.is_boundary_edge(g / np1) {
                        continue;
                    }
                    let v: c64 = (0..nw).map(|j| map[(2 * nw + j, a)] * phi[j]).sum();
                    trip.push((base + t * interior_nodes(p) + m, g, v));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(continuous_dim(mesh, p), mesh.n_edges() * np1, trip))
}

/// Evaluation of continuous `P_p` functions on `coarse` at the skeleton
/// nodes of `fine`.
pub fn evaluation_at_skeleton(coarse: &Mesh2D, fine: &Mesh2D, p: usize) -> CsrMatrix<f64> {
    let lag = LagrangeTriangle::new(p);
    let trace = Lagrange1D::lobatto(p);
    let np1 = p + 1;
    let mut trip = Vec::with_capacity(fine.n_edges() * np1 * lag.len());
    for e in 0..fine.n_edges() {
        let [a, b] = fine.edge_coords(e);
        for (k, &s) in trace.nodes().iter().enumerate() {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let (t, xi) = coarse.locate(x);
            let dofs = continuous_dofs(coarse, &lag, t);
            for (j, v) in lag.eval(xi).into_iter().enumerate() {
                if v.abs() > 1e-15 {
                    trip.push((e * np1 + k, dofs[j], v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(fine.n_edges() * np1, continuous_dim(coarse, p), trip)
}

/// Value at `x` of the continuous function with nodal values `values` on `mesh`.
pub fn evaluate_continuous(mesh: &Mesh2D, p: usize, values: &[c64], x: [f64; 2]) -> c64 {
    let lag = LagrangeTriangle::new(p);
    let (t, xi) = mesh.locate(x);
    let dofs = continuous_dofs(mesh, &lag, t);
    lag.eval(xi).into_iter().zip(dofs).map(|(v, d)| values[d] * v).sum()
}

/// Builds `I_l` from level `l` of `hierarchy` to its finest level.
pub fn build_transfer(
    hierarchy: &MeshHierarchy<Mesh2D>,
    l: usize,
    p: usize,
    kind: TransferKind<'_>,
    coarse_mass: BlockDiagonal,
    fine_mass: BlockDiagonal,
) -> Result<TransferOperator> {
    let big_l = hierarchy.finest_level();
    if l > big_l {
        return Err(Error::NotNested(format!("level {l} above finest level {big_l}")));
    }
    if l == big_l {
        return Ok(TransferOperator::identity(l, fine_mass));
    }
    build_transfer_between(hierarchy.level(l), hierarchy.finest(), l, p, kind, coarse_mass, fine_mass)
}

/// Transfer from `coarse` to any mesh `fine` that refines it.
pub fn build_transfer_between(
    coarse: &Mesh2D,
    fine: &Mesh2D,
    level: usize,
    p: usize,
    kind: TransferKind<'_>,
    coarse_mass: BlockDiagonal,
    fine_mass: BlockDiagonal,
) -> Result<TransferOperator> {
    if fine.n() % coarse.n() != 0 || fine.origin() != coarse.origin() || fine.side_length() != coarse.side_length() {
        return Err(Error::NotNested(format!("n = {} does not refine n = {}", fine.n(), coarse.n())));
    }
    let w = averaging_to_continuous(coarse, p, kind)?;
    let e = evaluation_at_skeleton(coarse, fine, p);
    TransferOperator::from_factors(level, w, e, coarse_mass, fine_mass)
}

/// Builds `I_l` on 1D grids. Interior values for `p >= 2` come from the
/// local solution `U_lambda` of the coarse element.
pub fn build_transfer_1d(
    hierarchy: &MeshHierarchy<Mesh1D>,
    l: usize,
    p: usize,
    kappa: f64,
    boundary: Boundary1D,
    coarse_mass: BlockDiagonal,
    fine_mass: BlockDiagonal,
) -> Result<TransferOperator> {
    let big_l = hierarchy.finest_level();
    if l > big_l {
        return Err(Error::NotNested(format!("level {l} above finest level {big_l}")));
    }
    if l == big_l {
        return Ok(TransferOperator::identity(l, fine_mass));
    }
    build_transfer_1d_between(hierarchy.level(l), hierarchy.finest(), l, p, kappa, boundary, coarse_mass, fine_mass)
}

/// 1D transfer from `coarse` to a uniform refinement `fine`.
#[allow(clippy::too_many_arguments)]
pub fn build_transfer_1d_between(
    coarse: &Mesh1D,
    fine: &Mesh1D,
    l: usize,
    p: usize,
    kappa: f64,
    boundary: Boundary1D,
    coarse_mass: BlockDiagonal,
    fine_mass: BlockDiagonal,
) -> Result<TransferOperator> {
    if fine.n_elements() % coarse.n_elements() != 0 || fine.interval() != coarse.interval() {
        return Err(Error::NotNested(format!(
            "{} elements do not refine {} elements",
            fine.n_elements(),
            coarse.n_elements()
        )));
    }
    let cnodes = dof_nodes(coarse, boundary);
    let fnodes = dof_nodes(fine, boundary);
    let nn = coarse.n_nodes();
    let mut index = vec![None; nn];
    for (k, &v) in cnodes.iter().enumerate() {
        index[v] = Some(k);
    }
    if boundary == Boundary1D::Periodic {
        index[nn - 1] = Some(0);
    }
    let (a, _) = coarse.interval();
    let h = coarse.h();
    let local = if p >= 2 { Some(Local1D::new(kappa, h, p, p as f64 / (kappa * h))?) } else { None };
    let mut trip = Vec::new();
    let ratio = fine.n_elements() / coarse.n_elements();
    for (i, &fnode) in fnodes.iter().enumerate() {
        let x = fine.node(fnode);
        let el = (fnode / ratio).min(coarse.n_elements() - 1);
        let s = (x - (a + el as f64 * h)) / h;
        let ends = [index[el], index[el + 1]];
        match &local {
            None => {
                for (end, wgt) in [(0, 1.0 - s), (1, s)] {
                    if let Some(j) = ends[end] {
                        if wgt != 0.0 {
                            trip.push((i, j, c64::from(wgt)));
                        }
                    }
                }
            }
            Some(loc) => {
                // continuous P_p: endpoint values from the trace, equispaced
                // interior nodes from U_lambda
                let nodes: Vec<f64> = (0..=p).map(|k| k as f64 / p as f64).collect();
                let lag = Lagrange1D::new(nodes.clone()).eval(s);
                for end in 0..2 {
                    let Some(j) = ends[end] else { continue };
                    let mut lam = [c64::default(); 2];
                    lam[end] = c64::from(1.0);
                    let x = loc.solve_trace(lam);
                    let mut v = c64::from(lag[if end == 0 { 0 } else { p }]);
                    for (k, &z) in nodes.iter().enumerate().take(p).skip(1) {
                        let y = 2.0 * z - 1.0;
                        let u: c64 = (0..=p).map(|m| x[p + 1 + m] * y.powi(m as i32)).sum();
                        v += u * lag[k];
                    }
                    if v.norm() > 1e-15 {
                        trip.push((i, j, v));
                    }
                }
            }
        }
    }
    // nodal traces are already continuous, so the whole map sits in the
    // (complex) first factor
    let interp = CsrMatrix::from_triplets(fnodes.len(), cnodes.len(), trip);
    TransferOperator::from_factors(l, interp, CsrMatrix::identity(fnodes.len()), coarse_mass, fine_mass)
}

/// Outcome of the energy stability check.
#[derive(Debug, Clone, Copy)]
pub struct EnergyRatio {
    /// Largest ratio over the random draws.
    pub sampled: f64,
    /// Power-iteration estimate of the largest generalized eigenvalue.
    pub power: f64,
    pub iterations: usize,
    /// Largest generalized eigenvalue from a dense symmetric eigensolve.
    pub dense: f64,
}

/// Estimates `max a_L(I_l mu, I_l mu) / a_l(mu, mu)` over `mu` in `M_l^0` for
/// the Poisson energy form.
pub fn energy_stability_ratio(
    hierarchy: &MeshHierarchy<Mesh2D>,
    l: usize,
    p: usize,
    trials: usize,
    seed: u64,
) -> Result<EnergyRatio> {
    let zero = |_: [f64; 2]| 0.0;
    let coarse = assemble_poisson(hierarchy.level(l), p, &zero, &zero)?;
    let fine = assemble_poisson(hierarchy.finest(), p, &zero, &zero)?;
    let cm = crate::hdg::skeleton_mass_2d(hierarchy.level(l), p)?;
    let fm = crate::hdg::skeleton_mass_2d(hierarchy.finest(), p)?;
    let tr = build_transfer(hierarchy, l, p, TransferKind::Poisson, cm, fm)?;
    let full = tr.to_dense().map(|z| z.re);
    let pm = DMatrix::from_fn(fine.free.len(), coarse.free.len(), |i, j| full[(fine.free[i], coarse.free[j])]);
    let a = coarse.energy_matrix();
    let b = pm.transpose() * fine.energy_matrix() * &pm;
    let chol = a.clone().cholesky().ok_or(Error::SingularMatrix(0))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = a.nrows();
    let mut sampled: f64 = 0.0;
    let mut drawn = 0;
    while drawn < trials {
        let x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let den = x.dot(&(&a * &x));
        if den <= 1e-14 * x.norm_squared() {
            continue;
        }
        sampled = sampled.max(x.dot(&(&b * &x)) / den);
        drawn += 1;
    }

    let mut x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let mut est = 0.0;
    let mut iterations = 0;
    for it in 1..=5000 {
        let y = chol.solve(&(&b * &x));
        let ny = y.dot(&(&a * &y)).sqrt();
        let new = y.dot(&(&b * &y)) / (ny * ny);
        x = y / ny;
        iterations = it;
        if (new - est).abs() <= 1e-10 * new.abs() {
            est = new;
            break;
        }
        est = new;
    }
    let linv = chol.l().try_inverse().ok_or(Error::SingularMatrix(0))?;
    let c = &linv * &b * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let dense = c.symmetric_eigenvalues().max();
    Ok(EnergyRatio { sampled, power: est, iterations, dense })
}

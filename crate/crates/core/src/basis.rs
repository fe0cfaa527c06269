//! Polynomial bases: scaled monomials for the element spaces, Lagrange
//! bases on edge Gauss–Lobatto points for traces, and nodal Lagrange bases
//! on triangles for continuous reconstructions.

use nalgebra::{DMatrix, DVector};

use crate::quadrature::gauss_lobatto_points;

/// Exponents `(a, b)` with `a + b <= p`, ordered by total degree.
pub fn monomial_exponents(p: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity((p + 1) * (p + 2) / 2);
    for d in 0..=p {
        for b in 0..=d {
            e.push((d - b, b));
        }
    }
    e
}

/// Monomials in coordinates centred at `center` and scaled by `scale`;
/// evaluating them on a triangle with `scale = diam` keeps local matrices
/// well conditioned for the degrees used here.
#[derive(Debug, Clone)]
pub struct ScaledMonomials {
    exps: Vec<(usize, usize)>,
    center: [f64; 2],
    scale: f64,
}

impl ScaledMonomials {
    pub fn new(p: usize, center: [f64; 2], scale: f64) -> Self {
        Self { exps: monomial_exponents(p), center, scale }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Values and physical gradients at `x`.
    pub fn eval(&self, x: [f64; 2], vals: &mut [f64], grads: &mut [[f64; 2]]) {
        let u = (x[0] - self.center[0]) / self.scale;
        let v = (x[1] - self.center[1]) / self.scale;
        for (k, &(a, b)) in self.exps.iter().enumerate() {
            let ua = u.powi(a as i32);
            let vb = v.powi(b as i32);
            vals[k] = ua * vb;
            let du = if a > 0 { a as f64 * u.powi(a as i32 - 1) * vb } else { 0.0 };
            let dv = if b > 0 { b as f64 * ua * v.powi(b as i32 - 1) } else { 0.0 };
            grads[k] = [du / self.scale, dv / self.scale];
        }
    }

    pub fn values(&self, x: [f64; 2]) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        let mut g = vec![[0.0; 2]; self.len()];
        self.eval(x, &mut v, &mut g);
        v
    }
}

/// Lagrange polynomials through `nodes` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Lagrange1D {
    nodes: Vec<f64>,
}

impl Lagrange1D {
    pub fn new(nodes: Vec<f64>) -> Self {
        Self { nodes }
    }

    /// Trace basis of degree `p` on Gauss–Lobatto points.
    pub fn lobatto(p: usize) -> Self {
        Self::new(gauss_lobatto_points(p))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        let n = &self.nodes;
        (0..n.len())
            .map(|i| {
                n.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &xj)| (s - xj) / (n[i] - xj))
                    .product()
            })
            .collect()
    }
}

/// Where a triangle Lagrange node sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Vertex(usize),
    /// Local edge `e` joins local vertices `e` and `(e + 1) % 3`; the value
    /// is the edge parameter measured from the lower-numbered local vertex.
    Edge { edge: usize, s: f64 },
    Interior,
}

/// Nodal Lagrange basis of `P_p` on the reference triangle with vertex
/// nodes, Gauss–Lobatto nodes on edges and lattice nodes inside.
#[derive(Debug, Clone)]
pub struct LagrangeTriangle {
    p: usize,
    nodes: Vec<[f64; 2]>,
    kinds: Vec<NodeKind>,
    /// Coefficients of each nodal basis function in reference monomials.
    coeffs: DMatrix<f64>,
}

const REF_VERTS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

impl LagrangeTriangle {
    pub fn new(p: usize) -> Self {
        let mut nodes = Vec::new();
        let mut kinds = Vec::new();
        for (v, x) in REF_VERTS.iter().enumerate() {
            nodes.push(*x);
            kinds.push(NodeKind::Vertex(v));
        }
        let gll = gauss_lobatto_points(p);
        for e in 0..3 {
            let (a, b) = (REF_VERTS[e], REF_VERTS[(e + 1) % 3]);
            for &s in &gll[1..p] {
                nodes.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                kinds.push(NodeKind::Edge { edge: e, s });
            }
        }
        for j in 1..p {
            for i in 1..p {
                if i + j < p {
                    nodes.push([i as f64 / p as f64, j as f64 / p as f64]);
                    kinds.push(NodeKind::Interior);
                }
            }
        }
        let mono = ScaledMonomials::new(p, [0.0, 0.0], 1.0);
        let n = mono.len();
        debug_assert_eq!(n, nodes.len());
        let mut vander = DMatrix::zeros(n, n);
        for (i, x) in nodes.iter().enumerate() {
            for (j, v) in mono.values(*x).into_iter().enumerate() {
                vander[(i, j)] = v;
            }
        }
        // phi_i = sum_j C[j, i] m_j with V C = I
        let coeffs = vander.try_inverse().expect("Lagrange nodes are unisolvent");
        Self { p, nodes, kinds, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    /// Values of all nodal basis functions at reference point `xi`.
    pub fn eval(&self, xi: [f64; 2]) -> Vec<f64> {
        let mono = ScaledMonomials::new(self.p, [0.0, 0.0], 1.0);
        let m = DVector::from_vec(mono.values(xi));
        (self.coeffs.transpose() * m).iter().copied().collect()
    }
}

//! Nested uniform meshes: 1D grids and structured triangulations of a
//! square, with skeleton enumeration and refinement genealogy.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// Uniform grid of an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    a: f64,
    b: f64,
    n_elements: usize,
    level: usize,
}

impl Mesh1D {
    pub fn new(a: f64, b: f64, n_elements: usize, level: usize) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidMesh(format!("interval ({a}, {b}) is empty")));
        }
        if n_elements == 0 {
            return Err(Error::InvalidMesh("at least one element is required".into()));
        }
        Ok(Self { a, b, n_elements, level })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_nodes(&self) -> usize {
        self.n_elements + 1
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n_elements as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_elements {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }

    fn refine(&self) -> Self {
        Self { a: self.a, b: self.b, n_elements: 2 * self.n_elements, level: self.level + 1 }
    }
}

/// Structured triangulation of an axis-aligned square: `n x n` cells, each
/// split by the diagonal from its lower-left to its upper-right corner.
///
/// Vertex `(i, j)` has index `j * (n + 1) + i`. Cell `(i, j)` owns triangles
/// `2 (j n + i)` (below the diagonal) and `2 (j n + i) + 1` (above it). Edges
/// are sorted lexicographically by `(min vertex, max vertex)`.
#[derive(Debug, Clone)]
pub struct Mesh2D {
    n: usize,
    level: usize,
    origin: [f64; 2],
    length: f64,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    /// Local edge `k` joins local vertices `k` and `(k + 1) % 3`; the flag is
    /// true when that direction agrees with the stored edge orientation.
    triangle_edges: Vec<[(usize, bool); 3]>,
    edge_triangles: Vec<(usize, Option<usize>)>,
}

impl Mesh2D {
    pub fn new(n: usize, origin: [f64; 2], length: f64, level: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("cells per side must be positive".into()));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidMesh(format!("side length {length} must be positive")));
        }
        let hx = length / n as f64;
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([origin[0] + i as f64 * hx, origin[1] + j as f64 * hx]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                triangles.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
                triangles.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            }
        }
        let mut edges = Vec::with_capacity(3 * n * n + 2 * n);
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.push([a.min(b), a.max(b)]);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut mesh = Self {
            n,
            level,
            origin,
            length,
            vertices,
            triangles,
            edges,
            triangle_edges: Vec::new(),
            edge_triangles: Vec::new(),
        };
        let mut edge_triangles: Vec<(usize, Option<usize>)> = vec![(usize::MAX, None); mesh.edges.len()];
        let mut triangle_edges = Vec::with_capacity(mesh.triangles.len());
        for (ti, t) in mesh.triangles.iter().enumerate() {
            let mut te = [(0, true); 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = mesh.edge_index(a, b).expect("edge exists");
                te[k] = (e, a < b);
                let slot = &mut edge_triangles[e];
                if slot.0 == usize::MAX {
                    slot.0 = ti;
                } else {
                    slot.1 = Some(ti);
                }
            }
            triangle_edges.push(te);
        }
        mesh.triangle_edges = triangle_edges;
        mesh.edge_triangles = edge_triangles;
        Ok(mesh)
    }

    /// Unit square centred at the origin, as used by the Helmholtz examples.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, [-0.5, -0.5], 1.0, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn side_length(&self) -> f64 {
        self.length
    }

    /// Cell width.
    pub fn cell_size(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Mesh size `h = max diam(T)`, the length of a cell diagonal.
    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.cell_size()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_edges(&self, t: usize) -> [(usize, bool); 3] {
        self.triangle_edges[t]
    }

    /// Adjacent triangles of an edge; the second is `None` on the boundary.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_triangles[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_triangles[e].1.is_none()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let (i, j) = (v % (self.n + 1), v / (self.n + 1));
        i == 0 || j == 0 || i == self.n || j == self.n
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&[a.min(b), a.max(b)]).ok()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let v = self.triangles[t];
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]]]
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let c = self.triangle_coords(t);
        [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0]
    }

    pub fn edge_coords(&self, e: usize) -> [[f64; 2]; 2] {
        let [a, b] = self.edges[e];
        [self.vertices[a], self.vertices[b]]
    }

    /// Edges incident to each vertex.
    pub fn vertex_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_vertices()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            out[a].push(e);
            out[b].push(e);
        }
        out
    }

    /// Triangle containing `x` (ties resolved towards the lower triangle and
    /// smaller cell indices), plus reference coordinates of `x` in it.
    pub fn locate(&self, x: [f64; 2]) -> (usize, [f64; 2]) {
        let hx = self.cell_size();
        let u = (x[0] - self.origin[0]) / hx;
        let v = (x[1] - self.origin[1]) / hx;
        let i = (u.floor().max(0.0) as usize).min(self.n - 1);
        let j = (v.floor().max(0.0) as usize).min(self.n - 1);
        let (fu, fv) = (u - i as f64, v - j as f64);
        let t = 2 * (j * self.n + i) + usize::from(fv > fu + 1e-12);
        (t, self.reference_coords(t, x))
    }

    /// Affine preimage of `x` under the map from the reference triangle.
    pub fn reference_coords(&self, t: usize, x: [f64; 2]) -> [f64; 2] {
        let [p0, p1, p2] = self.triangle_coords(t);
        let (a, b) = ([p1[0] - p0[0], p1[1] - p0[1]], [p2[0] - p0[0], p2[1] - p0[1]]);
        let det = a[0] * b[1] - a[1] * b[0];
        let r = [x[0] - p0[0], x[1] - p0[1]];
        [(r[0] * b[1] - r[1] * b[0]) / det, (a[0] * r[1] - a[1] * r[0]) / det]
    }

    fn refine(&self) -> Result<Self> {
        Self::new(2 * self.n, self.origin, self.length, self.level + 1)
    }

    /// Plain-text listing: one vertex, edge or triangle per line.
    pub fn write_listing<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# mesh n={} level={}", self.n, self.level)?;
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(out, "v {i} {:.17e} {:.17e}", v[0], v[1])?;
        }
        for (i, e) in self.edges.iter().enumerate() {
            writeln!(out, "e {i} {} {}", e[0], e[1])?;
        }
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(out, "t {i} {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// Where a fine edge sits relative to the next coarser mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeParent {
    Edge(usize),
    Triangle(usize),
}

/// Nested meshes `T_0, ..., T_L` from coarse to fine.
#[derive(Debug, Clone)]
pub struct MeshHierarchy<M> {
    meshes: Vec<M>,
    /// `child_facets[l][f]`: the two level-(l+1) edges covering level-l edge `f`
    /// (empty in 1D, where facets are points).
    child_facets: Vec<Vec<[usize; 2]>>,
    /// `child_cells[l][c]`: level-(l+1) cells covering level-l cell `c`.
    child_cells: Vec<Vec<Vec<usize>>>,
}

impl<M> MeshHierarchy<M> {
    pub fn meshes(&self) -> &[M] {
        &self.meshes
    }

    pub fn level(&self, l: usize) -> &M {
        &self.meshes[l]
    }

    pub fn finest(&self) -> &M {
        self.meshes.last().expect("hierarchy is never empty")
    }

    /// Index of the finest level, `L`.
    pub fn finest_level(&self) -> usize {
        self.meshes.len() - 1
    }

    pub fn child_facets(&self, l: usize) -> &[[usize; 2]] {
        &self.child_facets[l]
    }

    pub fn child_cells(&self, l: usize) -> &[Vec<usize>] {
        &self.child_cells[l]
    }
}

/// Builds `levels` nested triangulations of the unit square centred at the
/// origin, starting from `n0` cells per side.
pub fn build_hierarchy_2d(n0: usize, levels: usize) -> Result<MeshHierarchy<Mesh2D>> {
    build_hierarchy_2d_on(n0, levels, [-0.5, -0.5], 1.0)
}

pub fn build_hierarchy_2d_on(
    n0: usize,
    levels: usize,
    origin: [f64; 2],
    length: f64,
) -> Result<MeshHierarchy<Mesh2D>> {
    if levels == 0 {
        return Err(Error::InvalidMesh("at least one level is required".into()));
    }
    let mut meshes = vec![Mesh2D::new(n0, origin, length, 0)?];
    for _ in 1..levels {
        let next = meshes.last().unwrap().refine()?;
        meshes.push(next);
    }
    let mut child_facets = Vec::new();
    let mut child_cells = Vec::new();
    for w in meshes.windows(2) {
        let (coarse, fine) = (&w[0], &w[1]);
        let cn = coarse.n + 1;
        let fn_ = fine.n + 1;
        let lift = |v: usize| 2 * (v / cn) * fn_ + 2 * (v % cn);
        let facets = coarse
            .edges
            .iter()
            .map(|&[a, b]| {
                let (fa, fb) = (lift(a), lift(b));
                let mid = {
                    let (ia, ja) = (fa % fn_, fa / fn_);
                    let (ib, jb) = (fb % fn_, fb / fn_);
                    ((ja + jb) / 2) * fn_ + (ia + ib) / 2
                };
                [fine.edge_index(fa, mid).unwrap(), fine.edge_index(mid, fb).unwrap()]
            })
            .collect();
        let cells = (0..coarse.n_triangles())
            .map(|t| {
                let cell = t / 2;
                let (i, j) = (cell % coarse.n, cell / coarse.n);
                let fc = |ii: usize, jj: usize, up: usize| 2 * ((2 * j + jj) * fine.n + 2 * i + ii) + up;
                if t % 2 == 0 {
                    vec![fc(0, 0, 0), fc(1, 0, 0), fc(1, 0, 1), fc(1, 1, 0)]
                } else {
                    vec![fc(0, 0, 1), fc(0, 1, 0), fc(0, 1, 1), fc(1, 1, 1)]
                }
            })
            .collect();
        child_facets.push(facets);
        child_cells.push(cells);
    }
    Ok(MeshHierarchy { meshes, child_facets, child_cells })
}

/// Builds `levels` nested uniform grids of `(a, b)` starting from `n0` elements.
pub fn build_hierarchy_1d(a: f64, b: f64, n0: usize, levels: usize) -> Result<MeshHierarchy<Mesh1D>> {
    if levels == 0 {
        return Err(Error::InvalidMesh("at least one level is required".into()));
    }
    let mut meshes = vec![Mesh1D::new(a, b, n0, 0)?];
    for _ in 1..levels {
        let next = meshes.last().unwrap().refine();
        meshes.push(next);
    }
    let child_cells = meshes[..meshes.len() - 1]
        .iter()
        .map(|m| (0..m.n_elements).map(|k| vec![2 * k, 2 * k + 1]).collect())
        .collect();
    Ok(MeshHierarchy { meshes, child_facets: Vec::new(), child_cells })
}

impl MeshHierarchy<Mesh2D> {
    /// Classifies a level-(l+1) edge as lying on a level-l edge or inside a
    /// level-l triangle.
    pub fn edge_parent(&self, l: usize, fine_edge: usize) -> EdgeParent {
        let (coarse, fine) = (&self.meshes[l], &self.meshes[l + 1]);
        let [a, b] = fine.edge_coords(fine_edge);
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let (t, _) = coarse.locate(mid);
        let tol = 1e-12 * coarse.side_length();
        for (e, _) in coarse.triangle_edges(t) {
            let [p, q] = coarse.edge_coords(e);
            let on = |x: [f64; 2]| {
                let cross = (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0]);
                cross.abs() <= tol * coarse.cell_size().max(1.0)
            };
            if on(a) && on(b) {
                return EdgeParent::Edge(e);
            }
        }
        EdgeParent::Triangle(t)
    }
}

/// Number of skeleton unknowns: `(p + 1)` per edge in 2D.
pub fn skeleton_dof_count_2d(mesh: &Mesh2D, p: usize) -> usize {
    (p + 1) * mesh.n_edges()
}

/// One scalar per node in 1D, independent of `p`.
pub fn skeleton_dof_count_1d(mesh: &Mesh1D, _p: usize) -> usize {
    mesh.n_nodes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_closed_forms() {
        for n in 1..=64 {
            let m = Mesh2D::unit_square(n).unwrap();
            assert_eq!(m.n_triangles(), 2 * n * n);
            assert_eq!(m.n_edges(), 3 * n * n + 2 * n);
            let boundary = (0..m.n_edges()).filter(|&e| m.is_boundary_edge(e)).count();
            assert_eq!(boundary, 4 * n);
        }
    }

    #[test]
    fn single_cell() {
        let h = build_hierarchy_2d(1, 1).unwrap();
        assert_eq!(h.meshes().len(), 1);
        assert_eq!(h.finest().n_triangles(), 2);
        assert_eq!(h.finest().n_edges(), 5);
        assert_eq!(skeleton_dof_count_2d(h.finest(), 1), 10);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(build_hierarchy_2d(0, 2).is_err());
        assert!(build_hierarchy_2d(2, 0).is_err());
        assert!(build_hierarchy_1d(1.0, 1.0, 2, 1).is_err());
        assert!(build_hierarchy_1d(0.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn table_dof_counts() {
        assert_eq!(skeleton_dof_count_2d(&Mesh2D::unit_square(128).unwrap(), 1), 98816);
        assert_eq!(skeleton_dof_count_2d(&Mesh2D::unit_square(64).unwrap(), 2), 37248);
        let h = build_hierarchy_2d(16, 4).unwrap();
        assert_eq!(h.finest().n(), 128);
        assert_eq!(h.finest().n_edges(), 49408);
    }

    #[test]
    fn one_dimensional_sizes() {
        let h = build_hierarchy_1d(0.0, 10.0, 2000, 1).unwrap();
        assert!((h.finest().h() - 0.005).abs() < 1e-15);
        assert_eq!(build_hierarchy_1d(0.0, 1.0, 1, 1).unwrap().finest().h(), 1.0);
        let h = build_hierarchy_1d(0.0, 1.0, 2, 3).unwrap();
        assert_eq!(h.finest().h(), 0.125);
        assert_eq!(skeleton_dof_count_1d(h.finest(), 3), 9);
    }

    #[test]
    fn interior_edges_have_two_triangles() {
        let m = Mesh2D::unit_square(5).unwrap();
        for e in 0..m.n_edges() {
            let (t0, t1) = m.edge_triangles(e);
            assert!(t0 < m.n_triangles());
            let [a, b] = m.edge_coords(e);
            let same_side = (a[0] == b[0] && a[0].abs() == 0.5) || (a[1] == b[1] && a[1].abs() == 0.5);
            assert_eq!(t1.is_none(), same_side);
        }
    }

    #[test]
    fn children_are_geometrically_nested() {
        let h = build_hierarchy_2d(2, 3).unwrap();
        for l in 0..2 {
            let (c, f) = (h.level(l), h.level(l + 1));
            for (e, kids) in h.child_facets(l).iter().enumerate() {
                let [a, b] = c.edge_coords(e);
                let [k0a, k0b] = f.edge_coords(kids[0]);
                let [k1a, k1b] = f.edge_coords(kids[1]);
                let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                let close = |x: [f64; 2], y: [f64; 2]| (x[0] - y[0]).abs() + (x[1] - y[1]).abs() < 1e-14;
                assert!(close(k0a, a) && close(k0b, mid) && close(k1a, mid) && close(k1b, b));
            }
            for (t, kids) in h.child_cells(l).iter().enumerate() {
                assert_eq!(kids.len(), 4);
                for &k in kids {
                    let (loc, _) = c.locate(f.centroid(k));
                    assert_eq!(loc, t);
                }
            }
        }
    }

    #[test]
    fn fine_edges_have_exactly_one_parent() {
        let h = build_hierarchy_2d(2, 4).unwrap();
        for l in 0..3 {
            let mut on_edges = 0;
            for e in 0..h.level(l + 1).n_edges() {
                if let EdgeParent::Edge(_) = h.edge_parent(l, e) {
                    on_edges += 1;
                }
            }
            assert_eq!(on_edges, 2 * h.level(l).n_edges());
        }
    }
}

use hdg_multilevel::c64;
use hdg_multilevel::hdg::{assemble_condensed, recover_interior};
use hdg_multilevel::mesh::Mesh2D;
use hdg_multilevel::problems::{bessel_j0, bessel_j1, BesselProblem, CaveProblem, PlaneWave, Region, SecondOrder};
use hdg_multilevel::solvers::direct_solve;
use proptest::prelude::*;
use std::sync::Arc;

// (z, J_0(z), J_1(z)) from 30-digit arithmetic.
const TABLE: [(f64, f64, f64); 11] = [
    (0.5, 0.9384698072408129, 0.24226845767487389),
    (1.0, 0.76519768655796655, 0.44005058574493352),
    (2.404825557695773, -6.1087652597367304e-17, 0.51914749728946676),
    (5.0, -0.1775967713143383, -0.32757913759146522),
    (12.0, 0.047689310796833537, -0.22344710449062761),
    (29.5, -0.13314785829839821, -0.064304378099192397),
    (31.0, 0.051208145304542249, -0.1330243166663142),
    (50.0, 0.055812327669251815, -0.097511828125175138),
    (100.0, 0.019985850304223122, -0.077145352014112158),
    (333.3, 0.038466654416718675, -0.020687550206813365),
    (1000.0, 0.024786686152420175, 0.0047283119070895239),
];

#[test]
fn bessel_matches_reference_table() {
    for (z, j0, j1) in TABLE {
        assert!((bessel_j0(z) - j0).abs() <= 1e-12, "J0({z}) = {} vs {j0}", bessel_j0(z));
        assert!((bessel_j1(z) - j1).abs() <= 1e-12, "J1({z}) = {} vs {j1}", bessel_j1(z));
    }
}

#[test]
fn bessel_at_origin_and_first_zero() {
    assert_eq!(bessel_j0(0.0), 1.0);
    assert_eq!(bessel_j1(0.0), 0.0);
    assert!(bessel_j0(2.404825557695773).abs() <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    // J_0^2 + 2 J_1^2 <= 1 follows from J_0^2 + 2 sum J_k^2 = 1.
    #[test]
    fn bessel_bound(z in 0.0f64..1000.0) {
        let (a, b) = (bessel_j0(z), bessel_j1(z));
        prop_assert!(a * a + 2.0 * b * b <= 1.0 + 1e-12);
    }

    // J_1' = J_0 - J_1 / z
    #[test]
    fn bessel_derivative_identity(z in 0.5f64..800.0) {
        let h = 1e-5;
        let d = (bessel_j1(z + h) - bessel_j1(z - h)) / (2.0 * h);
        prop_assert!((d - (bessel_j0(z) - bessel_j1(z) / z)).abs() < 1e-8);
    }
}

#[test]
fn bessel_source_is_continuous_at_origin() {
    let b = BesselProblem::new(10.0).unwrap();
    assert!((b.source([0.0, 0.0]) - 10.0).abs() < 1e-14);
    for r in [1e-9, 1e-6, 1e-3] {
        assert!((b.source([r, 0.0]) - b.source([0.0, 0.0])).abs() < 20.0 * r);
        assert_eq!(b.source([r, 0.0]), b.source([-r, 0.0]));
    }
    assert!(b.exact([0.0, 0.0]).is_finite());
}

#[test]
fn bessel_exact_solution_satisfies_the_equation() {
    // -Laplace u - k^2 u = f by finite differences away from the origin
    let b = BesselProblem::new(7.0).unwrap();
    let h = 1e-3;
    for x in [[0.3, 0.1], [-0.2, 0.35], [0.45, -0.45]] {
        let u = |dx: f64, dy: f64| b.exact([x[0] + dx, x[1] + dy]);
        let lap = (u(h, 0.0) + u(-h, 0.0) + u(0.0, h) + u(0.0, -h) - 4.0 * u(0.0, 0.0)) / (h * h);
        let res = -lap - 49.0 * u(0.0, 0.0) - b.source(x);
        assert!(res.norm() < 1e-4, "x={x:?} res={res}");
    }
}

#[test]
fn mixed_form_recovers_second_order_equation() {
    // For u = random cubic, q = -grad u / (i k) and the mixed source
    // i k u + div q must equal f / (i k) with f = -Laplace u - k^2 u.
    let k = 3.5;
    let c: [c64; 10] = std::array::from_fn(|i| c64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()));
    let u = move |x: [f64; 2]| {
        let m = [1.0, x[0], x[1], x[0] * x[0], x[0] * x[1], x[1] * x[1], x[0].powi(3), x[0] * x[0] * x[1], x[0] * x[1] * x[1], x[1].powi(3)];
        c.iter().zip(m).map(|(a, b)| a * b).sum::<c64>()
    };
    let lap = move |x: [f64; 2]| {
        2.0 * c[3] + 2.0 * c[5] + 6.0 * c[6] * x[0] + 2.0 * c[7] * x[1] + 2.0 * c[8] * x[0] + 6.0 * c[9] * x[1]
    };
    let so = SecondOrder {
        wavenumber: Arc::new(move |_| k),
        source: Arc::new(move |x| -lap(x) - k * k * u(x)),
        boundary: Arc::new(|_, _| c64::default()),
    };
    let mixed = so.to_mixed_form(2);
    let ik = c64::new(0.0, k);
    for x in [[0.1, 0.2], [-0.4, 0.3], [0.25, -0.05]] {
        let div_q = -lap(x) / ik;
        let lhs = ik * u(x) + div_q;
        assert!((lhs - (mixed.source)(x)).norm() < 1e-12 * lhs.norm().max(1.0));
    }
}

#[test]
fn zero_source_maps_to_zero() {
    let pw = PlaneWave::new(5.0, [1.0, 0.0]).unwrap();
    let m = pw.mixed(1);
    assert_eq!((m.source)([0.1, 0.2]), c64::default());
}

fn solve(mesh: &Mesh2D, prob: &hdg_multilevel::hdg::HelmholtzProblem) -> Vec<c64> {
    let sys = assemble_condensed(mesh, prob).unwrap();
    direct_solve(&sys.galerkin, &sys.load).unwrap()
}

#[test]
fn bessel_problem_converges_at_order_p() {
    let b = BesselProblem::new(10.0).unwrap();
    for p in 1..=2 {
        let prob = b.mixed(p);
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let mesh = Mesh2D::unit_square(n).unwrap();
                let lam = solve(&mesh, &prob);
                recover_interior(&mesh, &prob, &lam).unwrap().l2_error_u(&|x| b.exact(x))
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate >= p as f64, "p={p} errs={errs:?}");
        }
    }
}

#[test]
fn plane_wave_mixed_data_converges() {
    let pw = PlaneWave::new(6.0, [0.6, 0.8]).unwrap();
    let prob = pw.mixed(1);
    let errs: Vec<f64> = [4, 8, 16]
        .iter()
        .map(|&n| {
            let mesh = Mesh2D::unit_square(n).unwrap();
            let lam = solve(&mesh, &prob);
            recover_interior(&mesh, &prob, &lam).unwrap().l2_error_q(&|x| pw.flux(x))
        })
        .collect();
    assert!((errs[1] / errs[2]).log2() >= 1.0, "{errs:?}");
}

#[test]
fn cave_histogram_matches_region_areas() {
    let cave = CaveProblem::new(40.0, 4.0, 2.0).unwrap();
    let (k1, k2, k3) = cave.wavenumbers();
    assert_eq!((k1, k2, k3), (10.0, 20.0, 40.0));
    let mesh = Mesh2D::unit_square(16).unwrap();
    let cell = 0.5 / 256.0;
    let mut area = [0.0; 3];
    for t in 0..mesh.n_triangles() {
        let k = cave.wavenumber_at(mesh.centroid(t));
        let i = [k1, k2, k3].iter().position(|&v| v == k).unwrap();
        area[i] += cell;
    }
    let a1 = cave.inner.area();
    let a2 = cave.middle.area() - a1;
    assert!((area[0] - a1).abs() < 1e-12 && (area[1] - a2).abs() < 1e-12);
    assert!((area[2] - (1.0 - a1 - a2)).abs() < 1e-12);
}

#[test]
fn cave_with_unit_ratios_is_constant() {
    let cave = CaveProblem::new(30.0, 1.0, 1.0).unwrap();
    for x in [[0.0, 0.0], [0.2, 0.2], [0.45, -0.4]] {
        assert_eq!(cave.wavenumber_at(x), 30.0);
    }
}

#[test]
fn cave_alignment_is_checked() {
    let cave = CaveProblem::new(30.0, 2.0, 1.5).unwrap();
    assert!(cave.check_alignment(8).is_ok());
    assert!(cave.check_alignment(4).is_err());
    let off = Region { lower: [-0.3, -0.3], upper: [0.3, 0.3] };
    let odd = cave.with_regions(off, cave.inner).unwrap();
    assert!(odd.check_alignment(64).is_err());
    assert!(cave.with_regions(Region { lower: [0.1, 0.0], upper: [0.0, 0.2] }, cave.inner).is_err());
    assert!(CaveProblem::new(-1.0, 1.0, 1.0).is_err());
}

#[test]
fn cave_solution_is_mirror_symmetric() {
    // The mesh diagonals run along x = y, so swapping the coordinates maps
    // the mesh to itself; the Gaussian source is invariant as well.
    let cave = CaveProblem::new(12.0, 1.0, 1.0).unwrap();
    let p = 2;
    let mesh = Mesh2D::unit_square(6).unwrap();
    let lam = solve(&mesh, &cave.mixed(p));
    let nodes = hdg_multilevel::basis::Lagrange1D::lobatto(p);
    let key = |x: [f64; 2]| ((x[0] * 1e8).round() as i64, (x[1] * 1e8).round() as i64);
    let mut at = std::collections::HashMap::new();
    for e in 0..mesh.n_edges() {
        let [a, b] = mesh.edge_coords(e);
        for (j, &s) in nodes.nodes().iter().enumerate() {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            at.insert((e, key(x)), lam[e * (p + 1) + j]);
        }
    }
    let vid: std::collections::HashMap<_, _> = mesh.vertices().iter().enumerate().map(|(i, &x)| (key(x), i)).collect();
    let mut checked = 0;
    for (e, &[va, vb]) in mesh.edges().iter().enumerate() {
        let [a, b] = mesh.edge_coords(e);
        let swap = |v: usize| vid[&key([mesh.vertices()[v][1], mesh.vertices()[v][0]])];
        let mirror = mesh.edge_index(swap(va), swap(vb)).unwrap();
        for (j, &s) in nodes.nodes().iter().enumerate() {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let y = at[&(mirror, key([x[1], x[0]]))];
            assert!((lam[e * (p + 1) + j] - y).norm() < 1e-9);
            checked += 1;
        }
    }
    assert_eq!(checked, lam.len());
}

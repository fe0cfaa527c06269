use hdg_multilevel::c64;
use hdg_multilevel::hdg::{assemble_condensed, recover_interior, solve_uncondensed_reference, HelmholtzProblem};
use hdg_multilevel::mesh::Mesh2D;
use nalgebra::{DMatrix, DVector};

fn plane_wave(kappa: f64, p: usize) -> (HelmholtzProblem, impl Fn([f64; 2]) -> c64) {
    let d = [0.6, 0.8];
    let u = move |x: [f64; 2]| (c64::i() * kappa * (d[0] * x[0] + d[1] * x[1])).exp();
    let prob = HelmholtzProblem::homogeneous(kappa, p)
        .with_boundary(move |x, n| (1.0 + d[0] * n[0] + d[1] * n[1]) * u(x));
    (prob, u)
}

fn dense_solve(a: &hdg_multilevel::sparse::CsrMatrix<c64>, b: &[c64]) -> Vec<c64> {
    let m: DMatrix<c64> = a.to_dense();
    m.lu().solve(&DVector::from_column_slice(b)).unwrap().iter().copied().collect()
}

#[test]
fn condensed_solution_matches_full_system() {
    for n in [1, 2] {
        for p in 1..=3 {
            for kappa in [1.0, 20.0] {
                let mesh = Mesh2D::unit_square(n).unwrap();
                let (prob, _) = plane_wave(kappa, p);
                let prob = prob.with_source(|x| c64::new(x[0] * x[1], 1.0 - x[0]));
                let sys = assemble_condensed(&mesh, &prob).unwrap();
                let lam = dense_solve(&sys.galerkin, &sys.load);
                let (lam_ref, full) = solve_uncondensed_reference(&mesh, &prob).unwrap();
                let err = lam.iter().zip(&lam_ref).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-10, "n={n} p={p} k={kappa} err={err}");
                let rec = recover_interior(&mesh, &prob, &lam).unwrap();
                for (a, b) in rec.elements.iter().zip(&full.elements) {
                    for (x, y) in a.u.iter().zip(&b.u) {
                        assert!((x - y).norm() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn plane_wave_converges() {
    for p in 1..=2 {
        let kappa = 6.0;
        let mut errs = Vec::new();
        for n in [4, 8, 16] {
            let mesh = Mesh2D::unit_square(n).unwrap();
            let (prob, u) = plane_wave(kappa, p);
            let sys = assemble_condensed(&mesh, &prob).unwrap();
            let lam = dense_solve(&sys.galerkin, &sys.load);
            let rec = recover_interior(&mesh, &prob, &lam).unwrap();
            errs.push(rec.l2_error_u(&u));
        }
        let rate = (errs[1] / errs[2]).log2();
        println!("p={p} errs={errs:?} rate={rate}");
        assert!(rate > p as f64 + 0.5, "p={p} errs={errs:?}");
    }
}

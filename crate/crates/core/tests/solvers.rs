use hdg_multilevel::c64;
use hdg_multilevel::hdg::{assemble_condensed, HelmholtzProblem};
use hdg_multilevel::mesh::Mesh2D;
use hdg_multilevel::solvers::{
    direct_solve, gauss_seidel_sweep, gmres, norm, smooth, weighted_jacobi_sweep, BandedLu, GmresOptions, Relaxation,
    RelaxationConfig,
};
use hdg_multilevel::sparse::CsrMatrix;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_to_csr(m: &DMatrix<c64>) -> CsrMatrix<c64> {
    let mut t = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != c64::default() {
                t.push((i, j, m[(i, j)]));
            }
        }
    }
    CsrMatrix::from_triplets(m.nrows(), m.ncols(), t)
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<c64> {
    DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { 4.0 } else { 0.0 };
        c64::new(d + rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
    })
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<c64> {
    (0..n).map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

#[test]
fn gmres_identity_one_step() {
    let a = CsrMatrix::<c64>::identity(5);
    let b: Vec<c64> = (0..5).map(|i| c64::new(i as f64, 1.0)).collect();
    let out = gmres(&a, &b, None, GmresOptions::default(), None).unwrap();
    assert_eq!(out.iterations, 1);
    assert!(out.converged);
    for (x, y) in out.x.iter().zip(&b) {
        assert!((x - y).norm() < 1e-14);
    }
}

#[test]
fn gmres_diagonal_two_steps() {
    let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, c64::from(1.0)), (1, 1, c64::from(2.0))]);
    let b = vec![c64::from(1.0); 2];
    let out = gmres(&a, &b, None, GmresOptions { max_iter: 2, tol: 1e-14, ..Default::default() }, None).unwrap();
    assert!(out.iterations <= 2);
    assert!((out.x[0] - 1.0).norm() < 1e-13 && (out.x[1] - 0.5).norm() < 1e-13);
}

#[test]
fn gmres_matches_explicit_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 20;
    let ad = random_matrix(n, &mut rng);
    let a = dense_to_csr(&ad);
    let b = random_vec(n, &mut rng);
    for k in 1..=8 {
        let out = gmres(&a, &b, None, GmresOptions::steps(k), None).unwrap();
        // Krylov basis b, Ab, ..., A^{k-1} b, then min |b - A K y|
        let mut kry = DMatrix::<c64>::zeros(n, k);
        let mut v = DVector::from_column_slice(&b);
        for j in 0..k {
            v /= c64::from(v.norm());
            kry.set_column(j, &v);
            v = &ad * &v;
        }
        let ak = &ad * &kry;
        let svd = ak.clone().svd(true, true);
        let y = svd.solve(&DVector::from_column_slice(&b), 1e-14).unwrap();
        let r_ref = (DVector::from_column_slice(&b) - ak * y).norm();
        let r = *out.history.last().unwrap();
        assert!((r - r_ref).abs() <= 1e-10 * norm(&b), "k={k} {r} {r_ref}");
        let ax = a.mul_vec(&out.x);
        let true_r = norm(&b.iter().zip(&ax).map(|(u, v)| u - v).collect::<Vec<_>>());
        assert!((true_r - r).abs() <= 1e-10 * norm(&b));
    }
}

#[test]
fn gmres_left_preconditioned_with_exact_inverse_takes_one_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ad = random_matrix(12, &mut rng);
    let a = dense_to_csr(&ad);
    let lu = BandedLu::factor(&a).unwrap();
    let pre = move |v: &[c64]| Ok(lu.solve(v));
    let b = random_vec(12, &mut rng);
    let out = gmres(&a, &b, None, GmresOptions::default(), Some(&pre)).unwrap();
    assert_eq!(out.iterations, 1);
}

#[test]
fn gmres_rejects_non_finite_operator() {
    let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, c64::new(f64::NAN, 0.0)), (1, 1, c64::from(1.0))]);
    assert!(gmres(&a, &[c64::from(1.0); 2], None, GmresOptions::default(), None).is_err());
}

#[test]
fn jacobi_and_gauss_seidel_basics() {
    let d = CsrMatrix::from_triplets(3, 3, (0..3).map(|i| (i, i, c64::from(i as f64 + 1.0))).collect());
    let b = vec![c64::from(1.0); 3];
    let mut x = vec![c64::default(); 3];
    weighted_jacobi_sweep(&d, &b, &mut x, 1.0, 1).unwrap();
    assert!((x[2] - 1.0 / 3.0).norm() < 1e-15);

    let l = CsrMatrix::from_triplets(
        3,
        3,
        vec![(0, 0, c64::from(2.0)), (1, 0, c64::from(1.0)), (1, 1, c64::from(1.0)), (2, 1, c64::new(0.0, 1.0)), (2, 2, c64::from(4.0))],
    );
    let xs = vec![c64::new(1.0, 2.0), c64::from(-1.0), c64::new(0.5, 0.0)];
    let b = l.mul_vec(&xs);
    let mut x = vec![c64::default(); 3];
    gauss_seidel_sweep(&l, &b, &mut x, 1).unwrap();
    for (u, v) in x.iter().zip(&xs) {
        assert!((u - v).norm() < 1e-14);
    }
    let zero = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c64::from(1.0)), (1, 1, c64::from(1.0))]);
    assert!(weighted_jacobi_sweep(&zero, &b[..2], &mut x[..2].to_vec(), 0.5, 1).is_err());
}

#[test]
fn sweeps_match_their_iteration_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ad = random_matrix(10, &mut rng);
    let a = dense_to_csr(&ad);
    let b = random_vec(10, &mut rng);
    let x0 = random_vec(10, &mut rng);
    let dinv = DMatrix::from_diagonal(&ad.diagonal().map(|v| 1.0 / v));
    let omega = 0.6;
    let sj = DMatrix::identity(10, 10) - dinv.clone() * c64::from(omega) * &ad;
    let mut x = x0.clone();
    weighted_jacobi_sweep(&a, &b, &mut x, omega, 1).unwrap();
    let want = &sj * DVector::from_column_slice(&x0) + dinv * c64::from(omega) * DVector::from_column_slice(&b);
    for i in 0..10 {
        assert!((x[i] - want[i]).norm() < 1e-12);
    }
    // GS: (D - L) x' = U x + b with A = D - L - U
    let lower = ad.lower_triangle();
    let upper = -(ad.upper_triangle() - DMatrix::from_diagonal(&ad.diagonal()));
    let rhs = upper * DVector::from_column_slice(&x0) + DVector::from_column_slice(&b);
    let want = lower.solve_lower_triangular(&rhs).unwrap();
    let mut x = x0.clone();
    gauss_seidel_sweep(&a, &b, &mut x, 1).unwrap();
    for i in 0..10 {
        assert!((x[i] - want[i]).norm() < 1e-12);
    }
}

#[test]
fn direct_solve_small_cases() {
    let a = CsrMatrix::from_triplets(
        2,
        2,
        vec![(0, 0, c64::from(2.0)), (0, 1, c64::from(1.0)), (1, 0, c64::from(1.0)), (1, 1, c64::from(2.0))],
    );
    let x = direct_solve(&a, &[c64::from(3.0); 2]).unwrap();
    assert!((x[0] - 1.0).norm() < 1e-15 && (x[1] - 1.0).norm() < 1e-15);
    let id = CsrMatrix::<c64>::identity(4);
    let b: Vec<c64> = (0..4).map(|i| c64::new(i as f64, -1.0)).collect();
    assert_eq!(direct_solve(&id, &b).unwrap(), b);
    let sing = CsrMatrix::from_triplets(2, 2, vec![(0, 0, c64::from(1.0)), (1, 0, c64::from(1.0))]);
    assert!(direct_solve(&sing, &b[..2]).is_err());
}

#[test]
fn banded_lu_pivots_when_needed() {
    // zero leading diagonal forces a row interchange
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n: usize = 30;
    let mut t = Vec::new();
    for i in 0..n {
        for j in i.saturating_sub(3)..(i + 3).min(n) {
            let v = if i == j && i % 4 == 0 { c64::default() } else { c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) };
            t.push((i, j, v));
        }
    }
    let a = CsrMatrix::from_triplets(n, n, t);
    let b = random_vec(n, &mut rng);
    let x = direct_solve(&a, &b).unwrap();
    let r: Vec<c64> = a.mul_vec(&x).iter().zip(&b).map(|(u, v)| u - v).collect();
    assert!(norm(&r) <= 1e-12 * norm(&b));
}

#[test]
fn coarsest_helmholtz_direct_solve_residual() {
    let mesh = Mesh2D::unit_square(16).unwrap();
    let prob = HelmholtzProblem::homogeneous(50.0, 1).with_boundary(|x, _| c64::new(x[0], 1.0));
    let sys = assemble_condensed(&mesh, &prob).unwrap();
    let x = direct_solve(&sys.operator, &sys.rhs).unwrap();
    let r = sys.residual(&x);
    assert!(norm(&r) <= 1e-12 * norm(&sys.rhs));
}

#[test]
fn smoother_from_zero_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = dense_to_csr(&random_matrix(8, &mut rng));
    let b = random_vec(8, &mut rng);
    for kind in [Relaxation::WeightedJacobi { omega: 0.6 }, Relaxation::GaussSeidel, Relaxation::Gmres] {
        let x = smooth(&a, &b, RelaxationConfig { kind, steps: 50 }).unwrap();
        let r: Vec<c64> = a.mul_vec(&x).iter().zip(&b).map(|(u, v)| u - v).collect();
        assert!(norm(&r) < 1e-6 * norm(&b), "{kind:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gmres_history_is_monotone(seed in 0u64..10_000, m in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = dense_to_csr(&DMatrix::from_fn(15, 15, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        let b = random_vec(15, &mut rng);
        let out = gmres(&a, &b, None, GmresOptions::steps(m), None).unwrap();
        for w in out.history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gmres_smoother_is_scale_equivariant(seed in 0u64..10_000, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = dense_to_csr(&random_matrix(10, &mut rng));
        let b = random_vec(10, &mut rng);
        let c = c64::new(re, im);
        let cb: Vec<c64> = b.iter().map(|v| v * c).collect();
        let cfg = RelaxationConfig { kind: Relaxation::Gmres, steps: 3 };
        let x = smooth(&a, &b, cfg).unwrap();
        let y = smooth(&a, &cb, cfg).unwrap();
        for i in 0..10 {
            prop_assert!((y[i] - x[i] * c).norm() <= 1e-11 * (1.0 + (x[i] * c).norm()));
        }
    }

    #[test]
    fn sweeps_fix_consistent_solutions(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = dense_to_csr(&random_matrix(9, &mut rng));
        let x = random_vec(9, &mut rng);
        let b = a.mul_vec(&x);
        let mut y = x.clone();
        weighted_jacobi_sweep(&a, &b, &mut y, 0.7, 2).unwrap();
        gauss_seidel_sweep(&a, &b, &mut y, 2).unwrap();
        for i in 0..9 {
            prop_assert!((y[i] - x[i]).norm() < 1e-12);
        }
    }
}

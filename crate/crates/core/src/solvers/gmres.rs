use num_complex::Complex64 as c64;

use super::{dot, norm, LinearOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    /// Maximum number of Krylov steps; there are no restarts.
    pub max_iter: usize,
    /// Stop once `|r_k| <= tol |r_0|`; zero runs all `max_iter` steps.
    pub tol: f64,
    /// Reorthogonalize when a new basis vector keeps a component larger
    /// than this along the previous ones.
    pub reorth_threshold: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-6, reorth_threshold: 1e-8 }
    }
}

impl GmresOptions {
    /// `m` steps with no tolerance test, as used for smoothing.
    pub fn steps(m: usize) -> Self {
        Self { max_iter: m, tol: 0.0, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<c64>,
    /// `|r_k|` for `k = 0, 1, ...`, measured in the (left-)preconditioned norm.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn finite(v: &[c64], what: &str) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// `(c, s, r)` with `[c s; -conj(s) c] [a; b] = [r; 0]` and real `c`.
fn givens(a: c64, b: c64) -> (f64, c64, c64) {
    if b == c64::default() {
        return (1.0, c64::default(), a);
    }
    if a == c64::default() {
        return (0.0, c64::new(1.0, 0.0) * b.conj() / b.norm(), c64::from(b.norm()));
    }
    let t = a.norm().hypot(b.norm());
    let phase = a / a.norm();
    (a.norm() / t, phase * b.conj() / t, phase * t)
}

/// Arnoldi state: orthonormal basis, rotated Hessenberg columns, Givens
/// rotations and the rotated right-hand side.
struct Arnoldi {
    basis: Vec<Vec<c64>>,
    h: Vec<Vec<c64>>,
    rot: Vec<(f64, c64)>,
    g: Vec<c64>,
    reorth_threshold: f64,
}

impl Arnoldi {
    fn new(r0: &[c64], beta: f64, m: usize, reorth_threshold: f64) -> Self {
        let mut basis = Vec::with_capacity(m + 1);
        basis.push(r0.iter().map(|v| v / beta).collect());
        Self { basis, h: Vec::with_capacity(m), rot: Vec::with_capacity(m), g: vec![c64::from(beta)], reorth_threshold }
    }

    /// Orthogonalizes `v` against the basis, appends the new column and
    /// returns `(residual estimate, breakdown)`. The next basis vector is
    /// pushed unless a breakdown occurred.
    fn step(&mut self, mut v: Vec<c64>) -> (f64, bool) {
        let k = self.h.len();
        let before = norm(&v);
        let mut col = vec![c64::default(); k + 2];
        for (i, q) in self.basis.iter().enumerate() {
            let c = dot(q, &v);
            col[i] += c;
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let mut after = norm(&v);
        let leak = self.basis.iter().map(|q| dot(q, &v).norm()).fold(0.0, f64::max);
        if after > 0.0 && leak > self.reorth_threshold * after {
            for (i, q) in self.basis.iter().enumerate() {
                let c = dot(q, &v);
                col[i] += c;
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
            after = norm(&v);
        }
        col[k + 1] = c64::from(after);
        for (i, &(c, s)) in self.rot.iter().enumerate() {
            let (u, l) = (col[i], col[i + 1]);
            col[i] = c * u + s * l;
            col[i + 1] = -s.conj() * u + c * l;
        }
        let (c, s, r) = givens(col[k], col[k + 1]);
        col[k] = r;
        col[k + 1] = c64::default();
        self.rot.push((c, s));
        let gk = self.g[k];
        self.g[k] = c * gk;
        self.g.push(-s.conj() * gk);
        self.h.push(col);
        let breakdown = after <= 1e-14 * before.max(f64::MIN_POSITIVE);
        if !breakdown {
            self.basis.push(v.iter().map(|z| z / after).collect());
        }
        (self.g[k + 1].norm(), breakdown)
    }

    /// Least-squares coefficients from the `k x k` upper triangle.
    fn coefficients(&self) -> Result<Vec<c64>> {
        let k = self.h.len();
        let mut y = vec![c64::default(); k];
        for i in (0..k).rev() {
            let mut s = self.g[i];
            for j in i + 1..k {
                s -= self.h[j][i] * y[j];
            }
            if self.h[i][i] == c64::default() {
                return Err(Error::SingularMatrix(i));
            }
            y[i] = s / self.h[i][i];
        }
        Ok(y)
    }
}

fn initial_guess(n: usize, x0: Option<&[c64]>) -> Result<Vec<c64>> {
    match x0 {
        Some(x0) if x0.len() != n => Err(Error::Dimension { expected: n, got: x0.len(), context: "GMRES initial guess" }),
        Some(x0) => Ok(x0.to_vec()),
        None => Ok(vec![c64::default(); n]),
    }
}

fn residual(a: &dyn LinearOperator, b: &[c64], x: &[c64]) -> Vec<c64> {
    let mut ax = vec![c64::default(); b.len()];
    a.apply(x, &mut ax);
    b.iter().zip(&ax).map(|(b, a)| b - a).collect()
}

/// Restart-free GMRES for `A x = b` with optional left preconditioner `B`:
/// minimizes `|B (b - A x)|` over `x0 + K_k(BA, B r_0)`.
///
/// The recurrence assumes `B` is linear. For a nonlinear `B` the reported
/// history no longer equals `|B (b - A x_k)|`; use [`fgmres`] instead.
pub fn gmres(
    a: &dyn LinearOperator,
    b: &[c64],
    x0: Option<&[c64]>,
    opts: GmresOptions,
    precond: Option<&dyn Fn(&[c64]) -> Result<Vec<c64>>>,
) -> Result<GmresOutcome> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension { expected: n, got: b.len(), context: "GMRES right-hand side" });
    }
    let mut x = initial_guess(n, x0)?;
    let apply_pre = |v: Vec<c64>| -> Result<Vec<c64>> {
        match precond {
            Some(p) => p(&v),
            None => Ok(v),
        }
    };
    let r0 = apply_pre(residual(a, b, &x))?;
    finite(&r0, "initial residual")?;
    let beta = norm(&r0);
    let mut history = vec![beta];
    if beta == 0.0 || opts.max_iter == 0 {
        return Ok(GmresOutcome { x, history, iterations: 0, converged: beta == 0.0 });
    }
    let mut arnoldi = Arnoldi::new(&r0, beta, opts.max_iter, opts.reorth_threshold);
    let mut converged = false;
    let mut w = vec![c64::default(); n];
    while arnoldi.h.len() < opts.max_iter {
        a.apply(arnoldi.basis.last().unwrap(), &mut w);
        let v = apply_pre(w.clone())?;
        finite(&v, "Krylov vector")?;
        let (res, breakdown) = arnoldi.step(v);
        history.push(res);
        if res <= opts.tol * beta || breakdown {
            converged = true;
            break;
        }
    }
    let y = arnoldi.coefficients()?;
    for (yj, q) in y.iter().zip(&arnoldi.basis) {
        x.iter_mut().zip(q).for_each(|(xi, q)| *xi += yj * q);
    }
    finite(&x, "GMRES iterate")?;
    Ok(GmresOutcome { x, history, iterations: y.len(), converged })
}

/// Flexible GMRES with right preconditioning: `z_k = B(v_k)` may change from
/// step to step, and `x_k = x0 + sum_j y_j z_j` minimizes the true residual
/// `|b - A x|` over that span. The history holds true residual norms.
pub fn fgmres(
    a: &dyn LinearOperator,
    b: &[c64],
    x0: Option<&[c64]>,
    opts: GmresOptions,
    precond: &dyn Fn(&[c64]) -> Result<Vec<c64>>,
) -> Result<GmresOutcome> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension { expected: n, got: b.len(), context: "GMRES right-hand side" });
    }
    let mut x = initial_guess(n, x0)?;
    let r0 = residual(a, b, &x);
    finite(&r0, "initial residual")?;
    let beta = norm(&r0);
    let mut history = vec![beta];
    if beta == 0.0 || opts.max_iter == 0 {
        return Ok(GmresOutcome { x, history, iterations: 0, converged: beta == 0.0 });
    }
    let mut arnoldi = Arnoldi::new(&r0, beta, opts.max_iter, opts.reorth_threshold);
    let mut zs: Vec<Vec<c64>> = Vec::with_capacity(opts.max_iter);
    let mut converged = false;
    while zs.len() < opts.max_iter {
        let z = precond(arnoldi.basis.last().unwrap())?;
        if z.len() != n {
            return Err(Error::Dimension { expected: n, got: z.len(), context: "preconditioner output" });
        }
        finite(&z, "preconditioned vector")?;
        let mut w = vec![c64::default(); n];
        a.apply(&z, &mut w);
        zs.push(z);
        let (res, breakdown) = arnoldi.step(w);
        history.push(res);
        if res <= opts.tol * beta || breakdown {
            converged = true;
            break;
        }
    }
    let y = arnoldi.coefficients()?;
    for (yj, z) in y.iter().zip(&zs) {
        x.iter_mut().zip(z).for_each(|(xi, z)| *xi += yj * z);
    }
    finite(&x, "GMRES iterate")?;
    Ok(GmresOutcome { x, history, iterations: y.len(), converged })
}

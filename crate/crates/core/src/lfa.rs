//! Local Fourier analysis of the 1D HDG-P1 Helmholtz operator.
//!
//! On a uniform grid with `t = k h` the condensed operator is the stencil
//! `[s1 s0 s1]`, so `A e^{i theta j} = (2 s1 cos theta + s0) e^{i theta j}`.
//! Smoothers, transfers and whole multilevel cycles then act on the
//! harmonic subspaces as small matrices whose spectral radii predict the
//! convergence of the real iteration.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::hdg::oned::{assemble_1d, Boundary1D};
use crate::mesh::{build_hierarchy_1d, Mesh1D};
use crate::multilevel::{cycle, CyclePlan, CycleShape, LevelStack, RestrictionMode};
use crate::solvers::{dot, gauss_seidel_sweep, gmres, norm, weighted_jacobi_sweep, GmresOptions, Relaxation};

const I: c64 = c64::new(0.0, 1.0);

/// Coarse symbols smaller than this mark a resonant frequency.
pub const RESONANCE: f64 = 1e-10;

/// Stencil `[s1 s0 s1]` of the operator-form HDG-P1 matrix at `t = k h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilSymbol {
    pub t: f64,
    pub s0: c64,
    pub s1: c64,
}

impl StencilSymbol {
    /// Reads the stencil off an assembled periodic grid of 8 unit elements.
    pub fn new(t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("t = k h must be positive, got {t}")));
        }
        let mesh = Mesh1D::new(0.0, 8.0, 8, 0)?;
        let sys = assemble_1d(&mesh, t, 1, Boundary1D::Periodic, &|_| c64::default(), [c64::default(); 2])?;
        let a = &sys.operator;
        let (s0, s1) = (a.get(3, 3), a.get(3, 4));
        if (a.get(3, 2) - s1).norm() > 1e-12 * s1.norm().max(1.0) {
            return Err(Error::NonFinite("asymmetric periodic stencil".into()));
        }
        Ok(Self { t, s0, s1 })
    }

    /// `2 s1 cos theta + s0`.
    pub fn symbol(&self, theta: f64) -> c64 {
        2.0 * self.s1 * theta.cos() + self.s0
    }
}

/// The rational closed-form stencil and its intermediate terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub t: f64,
    pub sigma: [c64; 4],
    pub s0: c64,
    pub s1: c64,
}

impl ClosedForm {
    /// Largest relative deviation of `(s0, s1)` from `(-a.s0, -2 a.s1)`:
    /// the sign and scaling under which the closed form matches the
    /// assembled operator.
    pub fn convention_gap(&self, a: &StencilSymbol) -> f64 {
        let d0 = (self.s0 + a.s0).norm() / a.s0.norm();
        let d1 = (self.s1 + 2.0 * a.s1).norm() / a.s1.norm();
        d0.max(d1)
    }

    /// Largest relative deviation of `(s0, s1)` from the assembled stencil.
    pub fn direct_gap(&self, a: &StencilSymbol) -> f64 {
        ((self.s0 - a.s0).norm() / a.s0.norm()).max((self.s1 - a.s1).norm() / a.s1.norm())
    }
}

fn nonzero(v: c64, factor: &'static str) -> Result<c64> {
    if v.norm() < 1e-12 {
        Err(Error::Pole(factor))
    } else {
        Ok(v)
    }
}

/// Evaluates the closed-form `(s0, s1)` at `t`. A denominator below 1e-12
/// in modulus is reported by name.
pub fn stencil_coefficients(t: f64) -> Result<ClosedForm> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Config(format!("t = k h must be positive, got {t}")));
    }
    let r = |x: f64| c64::from(x);
    let tc = r(t);
    let (t2, t3, t4, t5) = (t * t, t.powi(3), t.powi(4), t.powi(5));
    let sigma1 = t4 * I + t2 * c64::new(8.0, -12.0) - 72.0 - 12.0 * I;
    let sigma2 = r(36.0 * t - 2.0 * t3);
    let sigma3 = 6.0 * t2 - 72.0 + 12.0 * I;
    let sigma4 = r(t4 - 24.0 * t2 + 148.0);

    let t_ = nonzero(tc, "t")?;
    let s1_den = nonzero(sigma1, "sigma1")?;
    let cubic = nonzero(r(18.0 * t - t3), "18t - t^3")?;
    let quintic = nonzero(r(t5 - 24.0 * t3 + 148.0 * t), "t^5 - 24t^3 + 148t")?;
    let s4 = nonzero(sigma4, "sigma4")?;
    let octic = nonzero(r(t * (t.powi(8) - 24.0 * t.powi(6) + 184.0 * t4 - 864.0 * t2 + 5328.0)), "t(t^8 - 24t^6 + 184t^4 - 864t^2 + 5328)")?;

    let s1 = (sigma2 / (t_ * s1_den) - sigma2 * (3.0 * t2 * I + 18.0) / (cubic * s1_den)) / t_
        - (-2.0 * t4 * I + 12.0 * t2 * I + 72.0 + 136.0 * I) / quintic
        - (6.0 * t2 - 72.0 + 12.0 * I) / quintic;
    let big = -4.0 * t.powi(7) * I + t5 * c64::new(20.0, 84.0) + t3 * c64::new(-432.0, -480.0) + t * c64::new(2736.0, 432.0);
    let s0 = -(sigma3 / s4 - big / octic + 1.0) / t_ - (-4.0 * t4 * I + 60.0 * t2 * I + 72.0 - 160.0 * I) / quintic
        - sigma3 / (t_ * s4);
    Ok(ClosedForm { t, sigma: [sigma1, sigma2, sigma3, sigma4], s0, s1 })
}

/// Pointwise relaxation analysed by its symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoother {
    Jacobi { omega: f64 },
    GaussSeidel,
}

impl Smoother {
    pub fn relaxation(self) -> Relaxation {
        match self {
            Smoother::Jacobi { omega } => Relaxation::WeightedJacobi { omega },
            Smoother::GaussSeidel => Relaxation::GaussSeidel,
        }
    }
}

/// Symbol of one sweep: `1 - (2w/s0)(s1 cos theta + s0/2)` for Jacobi and
/// `-s1 e^{i theta} / (s1 e^{-i theta} + s0)` for lexicographic Gauss–Seidel.
pub fn smoother_symbol(a: &StencilSymbol, kind: Smoother, theta: f64) -> Result<c64> {
    match kind {
        Smoother::Jacobi { omega } => {
            if !(0.0..=1.0).contains(&omega) {
                return Err(Error::Config(format!("Jacobi weight {omega} outside [0, 1]")));
            }
            let s0 = nonzero(a.s0, "s0")?;
            Ok(1.0 - 2.0 * omega / s0 * (a.s1 * theta.cos() + a.s0 / 2.0))
        }
        Smoother::GaussSeidel => {
            let den = nonzero(a.s1 * (-I * theta).exp() + a.s0, "s1 e^{-i theta} + s0")?;
            Ok(-a.s1 * (I * theta).exp() / den)
        }
    }
}

/// Restriction stencil used in the symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// `[1/4 1/2 1/4]`, symbol `(1 + cos theta) / 2`.
    FullWeighting,
    /// Adjoint of linear interpolation in the skeleton inner product, which
    /// is what the solver applies on a uniform grid: `[1/2 1 1/2]`.
    MassAdjoint,
}

/// Linear interpolation symbol `(1 + cos theta) / 2`.
pub fn prolongation_symbol(theta: f64) -> f64 {
    (1.0 + theta.cos()) / 2.0
}

pub fn restriction_symbol(kind: Restriction, theta: f64) -> f64 {
    match kind {
        Restriction::FullWeighting => prolongation_symbol(theta),
        Restriction::MassAdjoint => 2.0 * prolongation_symbol(theta),
    }
}

/// The frequency that aliases with `theta` on the coarse grid.
pub fn complementary(theta: f64) -> f64 {
    if theta <= 0.0 {
        theta + PI
    } else {
        theta - PI
    }
}

/// `samples` uniform low frequencies in `(-pi/2, pi/2]`.
pub fn low_frequencies(samples: usize) -> Vec<f64> {
    (1..=samples).map(|k| -PI / 2.0 + PI * k as f64 / samples as f64).collect()
}

/// `samples` uniform frequencies in `(-pi, pi]`.
pub fn all_frequencies(samples: usize) -> Vec<f64> {
    (1..=samples).map(|k| -PI + 2.0 * PI * k as f64 / samples as f64).collect()
}

fn check_low(theta0: f64) -> Result<()> {
    if theta0 > -PI / 2.0 && theta0 <= PI / 2.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("theta0 = {theta0} is not a low frequency")))
    }
}

fn check_mu(mu: &[f64]) -> Result<()> {
    match mu.iter().find(|m| !m.is_finite()) {
        Some(m) => Err(Error::Config(format!("damping {m} is not finite"))),
        None => Ok(()),
    }
}

/// Spectral radius of a complex 2x2 matrix from its characteristic polynomial.
pub fn spectral_radius2(m: &Matrix2<c64>) -> f64 {
    let half = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let disc = (half * half - m.determinant()).sqrt();
    (half + disc).norm().max((half - disc).norm())
}

/// Spectral radius of a complex 4x4 matrix via its Schur form.
pub fn spectral_radius4(m: &Matrix4<c64>) -> f64 {
    match m.eigenvalues() {
        Some(ev) => ev.iter().map(|z| z.norm()).fold(0.0, f64::max),
        None => f64::NAN,
    }
}

/// Iteration matrix on one harmonic subspace. A resonant frequency has no
/// matrix and an infinite radius.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSymbol<const N: usize> {
    pub theta0: f64,
    pub matrix: Option<SMatrix<c64, N, N>>,
}

pub type TwoLevelSymbol = HarmonicSymbol<2>;
pub type ThreeLevelSymbol = HarmonicSymbol<4>;

impl TwoLevelSymbol {
    pub fn spectral_radius(&self) -> f64 {
        self.matrix.as_ref().map_or(f64::INFINITY, spectral_radius2)
    }
}

impl ThreeLevelSymbol {
    pub fn spectral_radius(&self) -> f64 {
        self.matrix.as_ref().map_or(f64::INFINITY, spectral_radius4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    pub smoother: Smoother,
    /// Damping of the coarse correction.
    pub mu0: f64,
    /// Damping of the fine smoothing step.
    pub mu1: f64,
    pub restriction: Restriction,
}

impl Default for TwoLevelParams {
    fn default() -> Self {
        Self { smoother: Smoother::Jacobi { omega: 0.6 }, mu0: 0.5, mu1: 0.5, restriction: Restriction::FullWeighting }
    }
}

/// Coarse correction followed by one fine smoothing step, fine `t = k h`
/// and coarse `2t`.
#[derive(Debug, Clone)]
pub struct TwoLevel {
    pub params: TwoLevelParams,
    pub fine: StencilSymbol,
    pub coarse: StencilSymbol,
}

impl TwoLevel {
    pub fn new(t: f64, params: TwoLevelParams) -> Result<Self> {
        check_mu(&[params.mu0, params.mu1])?;
        Ok(Self { params, fine: StencilSymbol::new(t)?, coarse: StencilSymbol::new(2.0 * t)? })
    }

    /// `[I - mu1 (I - S)] [I - mu0 P A0(2 theta0)^{-1} R^T A]` on the pair
    /// `(theta0, theta1)`.
    pub fn matrix(&self, theta0: f64) -> Result<TwoLevelSymbol> {
        check_low(theta0)?;
        let p = &self.params;
        let th = [theta0, complementary(theta0)];
        let a0 = self.coarse.symbol(2.0 * theta0);
        if a0.norm() < RESONANCE {
            return Ok(HarmonicSymbol { theta0, matrix: None });
        }
        let a = Matrix2::from_diagonal(&th.map(|x| self.fine.symbol(x)).into());
        let s = Matrix2::from_diagonal(&[smoother_symbol(&self.fine, p.smoother, th[0])?, smoother_symbol(&self.fine, p.smoother, th[1])?].into());
        let pr = nalgebra::Vector2::from(th.map(|x| c64::from(prolongation_symbol(x))));
        let re = nalgebra::Vector2::from(th.map(|x| c64::from(restriction_symbol(p.restriction, x))));
        let id = Matrix2::<c64>::identity();
        let coarse = id - pr * (re.transpose() * a) * (c64::from(p.mu0) / a0);
        let smooth = id - (id - s) * c64::from(p.mu1);
        Ok(HarmonicSymbol { theta0, matrix: Some(smooth * coarse) })
    }
}

/// How the middle level of a three-level cycle is treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MiddleLevel {
    Smoothed(Smoother),
    /// Exact solve; used to check that the three-level matrix degenerates.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelParams {
    pub fine: Smoother,
    pub middle: MiddleLevel,
    /// Damping `mu_0, mu_1, mu_2`, coarsest first.
    pub mu: [f64; 3],
    pub restriction: Restriction,
}

impl Default for ThreeLevelParams {
    fn default() -> Self {
        let jac = Smoother::Jacobi { omega: 0.6 };
        Self { fine: jac, middle: MiddleLevel::Smoothed(jac), mu: [0.5; 3], restriction: Restriction::FullWeighting }
    }
}

/// Three levels with `t`, `2t`, `4t`, analysed on the four frequencies
/// that alias on the coarsest grid.
#[derive(Debug, Clone)]
pub struct ThreeLevel {
    pub params: ThreeLevelParams,
    pub fine: StencilSymbol,
    pub middle: StencilSymbol,
    pub coarse: StencilSymbol,
}

impl ThreeLevel {
    pub fn new(t: f64, params: ThreeLevelParams) -> Result<Self> {
        check_mu(&params.mu)?;
        Ok(Self {
            params,
            fine: StencilSymbol::new(t)?,
            middle: StencilSymbol::new(2.0 * t)?,
            coarse: StencilSymbol::new(4.0 * t)?,
        })
    }

    /// Fine frequencies `(theta00, theta01, theta10, theta11)` for the
    /// middle-level pair `(theta0, theta1)`.
    pub fn frequencies(theta0: f64) -> [f64; 4] {
        let t1 = complementary(theta0);
        let (a, b) = (theta0 / 2.0, t1 / 2.0);
        [a, complementary(a), b, complementary(b)]
    }

    /// The 4x4 matrix: coarse correction, then the middle-level correction,
    /// then fine smoothing; `theta0` is a middle-level low frequency.
    pub fn matrix(&self, theta0: f64) -> Result<ThreeLevelSymbol> {
        check_low(theta0)?;
        let p = &self.params;
        let a0 = self.coarse.symbol(2.0 * theta0);
        if a0.norm() < RESONANCE {
            return Ok(HarmonicSymbol { theta0, matrix: None });
        }
        let mid = [theta0, complementary(theta0)];
        let fine = Self::frequencies(theta0);
        let c = c64::from;
        let a2 = Matrix4::from_diagonal(&fine.map(|x| self.fine.symbol(x)).into());
        let mut s2 = Matrix4::<c64>::zeros();
        for (k, &x) in fine.iter().enumerate() {
            s2[(k, k)] = smoother_symbol(&self.fine, p.fine, x)?;
        }
        // R1 = (I - S1) A1^{-1}, the middle-level approximate inverse
        let mut r1 = Matrix2::<c64>::zeros();
        for (k, &x) in mid.iter().enumerate() {
            let a1 = nonzero(self.middle.symbol(x), "middle-level symbol")?;
            let s1 = match p.middle {
                MiddleLevel::Smoothed(kind) => smoother_symbol(&self.middle, kind, x)?,
                MiddleLevel::Exact => c64::default(),
            };
            r1[(k, k)] = (1.0 - s1) / a1;
        }
        let mut p21 = SMatrix::<c64, 4, 2>::zeros();
        let mut r12 = SMatrix::<c64, 2, 4>::zeros();
        for (k, &x) in fine.iter().enumerate() {
            p21[(k, k / 2)] = c(prolongation_symbol(x));
            r12[(k / 2, k)] = c(restriction_symbol(p.restriction, x));
        }
        let p10 = nalgebra::Vector2::from(mid.map(|x| c(prolongation_symbol(x))));
        let r01 = nalgebra::Vector2::from(mid.map(|x| c(restriction_symbol(p.restriction, x)))).transpose();
        let id = Matrix4::<c64>::identity();
        let coarse = id - (p21 * p10) * (r01 * r12 * a2) * (c(p.mu[0]) / a0);
        let middle = id - p21 * r1 * r12 * a2 * c(p.mu[1]);
        let smooth = id - (id - s2) * c(p.mu[2]);
        Ok(HarmonicSymbol { theta0, matrix: Some(smooth * middle * coarse) })
    }
}

/// Spectral radius over a frequency grid; resonant samples are excluded
/// from `max` and listed separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub resonant: Vec<f64>,
    pub max: f64,
}

impl Sweep {
    fn collect(samples: impl Iterator<Item = Result<(f64, f64)>>) -> Result<Self> {
        let (mut theta, mut rho, mut resonant, mut max) = (Vec::new(), Vec::new(), Vec::new(), 0.0f64);
        for s in samples {
            let (x, r) = s?;
            if r.is_infinite() {
                resonant.push(x);
            } else {
                max = max.max(r);
            }
            theta.push(x);
            rho.push(r);
        }
        Ok(Self { theta, rho, resonant, max })
    }
}

pub fn sweep_two_level(model: &TwoLevel, samples: usize) -> Result<Sweep> {
    Sweep::collect(low_frequencies(samples).into_iter().map(|x| Ok((x, model.matrix(x)?.spectral_radius()))))
}

pub fn sweep_three_level(model: &ThreeLevel, samples: usize) -> Result<Sweep> {
    Sweep::collect(low_frequencies(samples).into_iter().map(|x| Ok((x, model.matrix(x)?.spectral_radius()))))
}

/// `|S(theta)|` over `(-pi, pi]`.
pub fn sweep_smoother(a: &StencilSymbol, kind: Smoother, samples: usize) -> Result<Sweep> {
    Sweep::collect(all_frequencies(samples).into_iter().map(|x| Ok((x, smoother_symbol(a, kind, x)?.norm()))))
}

/// The actual two-grid cycle (coarse correction, one fine sweep) on a
/// periodic grid of `n` unit elements with wavenumber `t`.
#[derive(Debug, Clone)]
pub struct PeriodicTwoGrid {
    pub n: usize,
    stack: LevelStack,
    plan: CyclePlan,
}

impl PeriodicTwoGrid {
    pub fn new(t: f64, n: usize, smoother: Smoother, mu0: f64, mu1: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidMesh(format!("periodic two-grid needs an even n >= 4, got {n}")));
        }
        let hier = build_hierarchy_1d(0.0, n as f64, n / 2, 2)?;
        let zero = |_: f64| c64::default();
        let stack = LevelStack::helmholtz_1d(&hier, t, 1, Boundary1D::Periodic, &zero, [c64::default(); 2], RestrictionMode::Direct)?;
        let plan = CyclePlan {
            alpha: f64::INFINITY,
            damping: vec![mu0, mu1],
            steps: [1; 4],
            linear: smoother.relaxation(),
            shape: CycleShape::DownOnly,
            restriction: RestrictionMode::Direct,
        };
        plan.validate()?;
        Ok(Self { n, stack, plan })
    }

    /// Error after one cycle started from `e` with zero right-hand side.
    pub fn apply(&self, e: &[c64]) -> Result<Vec<c64>> {
        cycle(&self.stack, &self.plan, e, &vec![c64::default(); self.n])
    }

    /// The 2x2 action on the harmonics `theta0 = 2 pi k / n` and its
    /// complement, with the largest component left outside the pair.
    pub fn harmonic_action(&self, k: i64) -> Result<(Matrix2<c64>, f64)> {
        let theta0 = 2.0 * PI * k as f64 / self.n as f64;
        check_low(theta0)?;
        let th = [theta0, complementary(theta0)];
        let modes: Vec<Vec<c64>> = th.iter().map(|&x| harmonic(self.n, x)).collect();
        let mut m = Matrix2::zeros();
        let mut leak = 0.0f64;
        for (j, mode) in modes.iter().enumerate() {
            let out = self.apply(mode)?;
            let mut rest = out.clone();
            for (i, phi) in modes.iter().enumerate() {
                let c = dot(phi, &out) / self.n as f64;
                m[(i, j)] = c;
                rest.iter_mut().zip(phi).for_each(|(r, p)| *r -= c * p);
            }
            leak = leak.max(norm(&rest) / norm(mode));
        }
        Ok((m, leak))
    }
}

/// `e^{i theta j}` for `j = 0..n`.
pub fn harmonic(n: usize, theta: f64) -> Vec<c64> {
    (0..n).map(|j| (I * theta * j as f64).exp()).collect()
}

/// Norm in which one smoothing step is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplificationNorm {
    /// `|u_1| / |u_0|`.
    Iterate,
    /// `|A u_1| / |A u_0|`.
    Residual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationSetup {
    pub kappa: f64,
    pub h: f64,
    pub interval: (f64, f64),
    pub samples: usize,
    pub omega: f64,
    pub measure: AmplificationNorm,
}

impl Default for AmplificationSetup {
    fn default() -> Self {
        Self { kappa: 200.0, h: 0.005, interval: (0.0, 10.0), samples: 256, omega: 0.6, measure: AmplificationNorm::Iterate }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationCurves {
    pub theta: Vec<f64>,
    pub jacobi: Vec<f64>,
    pub gauss_seidel: Vec<f64>,
    pub gmres: Vec<f64>,
}

impl AmplificationCurves {
    /// Fraction of samples where GMRES is no worse than both other smoothers.
    pub fn gmres_dominance(&self) -> f64 {
        let ok = (0..self.theta.len())
            .filter(|&k| self.gmres[k] <= self.jacobi[k] && self.gmres[k] <= self.gauss_seidel[k])
            .count();
        ok as f64 / self.theta.len().max(1) as f64
    }
}

/// One step of each smoother on `A u = 0` with homogeneous Dirichlet data,
/// started from `u_0 = e^{i theta x / h}` on the interior nodes.
pub fn gmres_amplification_experiment(setup: &AmplificationSetup) -> Result<AmplificationCurves> {
    let (a, b) = setup.interval;
    if !(setup.h > 0.0 && b > a && setup.samples > 0) {
        return Err(Error::Config("amplification experiment needs h > 0, a < b and samples > 0".into()));
    }
    let n = ((b - a) / setup.h).round() as usize;
    let mesh = Mesh1D::new(a, b, n, 0)?;
    let sys = assemble_1d(&mesh, setup.kappa, 1, Boundary1D::Dirichlet, &|_| c64::default(), [c64::default(); 2])?;
    let op = &sys.operator;
    let xs: Vec<f64> = (1..n).map(|i| mesh.node(i)).collect();
    let zero = vec![c64::default(); xs.len()];
    let size = |u: &[c64]| match setup.measure {
        AmplificationNorm::Iterate => norm(u),
        AmplificationNorm::Residual => norm(&op.mul_vec(u)),
    };
    let mut out = AmplificationCurves { theta: Vec::new(), jacobi: Vec::new(), gauss_seidel: Vec::new(), gmres: Vec::new() };
    for theta in all_frequencies(setup.samples) {
        let u0: Vec<c64> = xs.iter().map(|&x| (I * theta * x / setup.h).exp()).collect();
        let base = size(&u0);
        let mut uj = u0.clone();
        weighted_jacobi_sweep(op, &zero, &mut uj, setup.omega, 1)?;
        let mut ug = u0.clone();
        gauss_seidel_sweep(op, &zero, &mut ug, 1)?;
        let um = gmres(op, &zero, Some(&u0), GmresOptions::steps(1), None)?.x;
        out.theta.push(theta);
        out.jacobi.push(size(&uj) / base);
        out.gauss_seidel.push(size(&ug) / base);
        out.gmres.push(size(&um) / base);
    }
    Ok(out)
}

//! The multilevel iteration and its use as a preconditioner for GMRES.
//!
//! One cycle starting from `v_0` runs the levels `0, 1, ..., L` and then
//! `L, ..., 1, 0`. At each step the correction problem on level `l` is
//! `A_l w = Q_l (F_L - A_L v)`, formed from the current finest residual; it
//! is solved exactly on level 0, approximately by GMRES smoothing where
//! `k h_l / p >= alpha`, and by Jacobi or Gauss–Seidel elsewhere. The update
//! is `v <- v + mu_l I_l w`.

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::hdg::oned::{assemble_1d, Boundary1D};
use crate::hdg::{assemble_condensed, HelmholtzProblem, SkeletonSystem};
use crate::mesh::{Mesh1D, Mesh2D, MeshHierarchy};
use crate::solvers::{fgmres, gmres, norm, smooth, BandedLu, GmresOptions, GmresOutcome, Relaxation, RelaxationConfig};
use crate::transfer::{build_transfer_1d_between, build_transfer_between, TransferKind, TransferOperator};

/// Which half-sweeps a cycle performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleShape {
    /// Levels `0..=L`, then `L..=0`.
    Full,
    /// Levels `0..=L` only.
    DownOnly,
}

/// How level-`l` quantities reach the finest level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictionMode {
    /// `I_l` maps level `l` straight to level `L`.
    Direct,
    /// `I_l` is the product of transfers between adjacent levels.
    Recursive,
}

/// Smoother schedule and damping for the cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclePlan {
    /// GMRES smoothing is used on levels with `k h_l / p >= alpha`.
    pub alpha: f64,
    /// Damping `mu_l`; the last entry is reused for finer levels.
    pub damping: Vec<f64>,
    /// Steps `m_1..m_4`: GMRES (down), linear (down), linear (up), GMRES (up).
    pub steps: [usize; 4],
    /// Relaxation used below the threshold.
    pub linear: Relaxation,
    pub shape: CycleShape,
    pub restriction: RestrictionMode,
}

impl Default for CyclePlan {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            damping: vec![0.5],
            steps: [2; 4],
            linear: Relaxation::GaussSeidel,
            shape: CycleShape::Full,
            restriction: RestrictionMode::Direct,
        }
    }
}

impl CyclePlan {
    pub fn with_steps(mut self, m: usize) -> Self {
        self.steps = [m; 4];
        self
    }

    pub fn mu(&self, l: usize) -> f64 {
        *self.damping.get(l).or(self.damping.last()).unwrap_or(&0.5)
    }

    /// Smoother on a level with the given `k h / p`; `down` selects `m_1, m_2`
    /// over `m_4, m_3`.
    pub fn smoother(&self, kappa_h_over_p: f64, down: bool) -> RelaxationConfig {
        let gmres = kappa_h_over_p >= self.alpha;
        let steps = match (gmres, down) {
            (true, true) => self.steps[0],
            (false, true) => self.steps[1],
            (false, false) => self.steps[2],
            (true, false) => self.steps[3],
        };
        let kind = if gmres { Relaxation::Gmres } else { self.linear };
        RelaxationConfig { kind, steps }
    }

    pub fn validate(&self) -> Result<()> {
        if self.damping.is_empty() || self.damping.iter().any(|m| !m.is_finite()) {
            return Err(Error::Config("damping factors must be finite and non-empty".into()));
        }
        if self.alpha.is_nan() {
            return Err(Error::Config("alpha must be a number".into()));
        }
        for kind in [self.linear, Relaxation::Gmres] {
            for &steps in &self.steps {
                RelaxationConfig { kind, steps }.validate()?;
            }
        }
        Ok(())
    }
}

/// Systems and transfers on every level.
#[derive(Debug, Clone)]
pub struct LevelStack {
    pub systems: Vec<SkeletonSystem>,
    /// `transfers[l]` maps level `l` to the finest level (direct mode).
    pub transfers: Vec<TransferOperator>,
    /// `adjacent[l]` maps level `l` to level `l + 1` (recursive mode only).
    pub adjacent: Vec<TransferOperator>,
    coarse: BandedLu,
}

impl LevelStack {
    /// Checks dimensions and factors the coarsest operator. Either
    /// `transfers` (one per level, to the finest) or `adjacent` (one per
    /// pair of neighbouring levels) must be complete.
    pub fn new(
        systems: Vec<SkeletonSystem>,
        transfers: Vec<TransferOperator>,
        adjacent: Vec<TransferOperator>,
    ) -> Result<Self> {
        let levels = systems.len();
        if levels == 0 {
            return Err(Error::Config("a level stack needs at least one level".into()));
        }
        let fine = systems[levels - 1].dim();
        if !transfers.is_empty() {
            if transfers.len() != levels {
                return Err(Error::Dimension { expected: levels, got: transfers.len(), context: "one transfer per level" });
            }
            for (s, t) in systems.iter().zip(&transfers) {
                if t.coarse_dim() != s.dim() || t.fine_dim() != fine {
                    return Err(Error::Dimension { expected: s.dim(), got: t.coarse_dim(), context: "transfer vs level" });
                }
            }
        }
        if !adjacent.is_empty() {
            if adjacent.len() + 1 != levels {
                return Err(Error::Dimension { expected: levels - 1, got: adjacent.len(), context: "adjacent transfers" });
            }
            for (l, t) in adjacent.iter().enumerate() {
                if t.coarse_dim() != systems[l].dim() || t.fine_dim() != systems[l + 1].dim() {
                    return Err(Error::Dimension {
                        expected: systems[l].dim(),
                        got: t.coarse_dim(),
                        context: "adjacent transfer vs level",
                    });
                }
            }
        }
        if transfers.is_empty() && adjacent.is_empty() && levels > 1 {
            return Err(Error::Config("no transfer operators given".into()));
        }
        let coarse = BandedLu::factor(&systems[0].operator)?;
        Ok(Self { systems, transfers, adjacent, coarse })
    }

    /// Helmholtz systems on every level of a 2D hierarchy.
    pub fn helmholtz_2d(
        hierarchy: &MeshHierarchy<Mesh2D>,
        problem: &HelmholtzProblem,
        mode: RestrictionMode,
    ) -> Result<Self> {
        let p = problem.p;
        let systems =
            hierarchy.meshes().iter().map(|m| assemble_condensed(m, problem)).collect::<Result<Vec<_>>>()?;
        let big_l = hierarchy.finest_level();
        let fine_mass = systems[big_l].mass.clone();
        let kind = TransferKind::Helmholtz(problem);
        let mut transfers = Vec::with_capacity(systems.len());
        if mode == RestrictionMode::Direct {
            for l in 0..=big_l {
                transfers.push(if l == big_l {
                    TransferOperator::identity(l, fine_mass.clone())
                } else {
                    build_transfer_between(
                        hierarchy.level(l),
                        hierarchy.finest(),
                        l,
                        p,
                        kind,
                        systems[l].mass.clone(),
                        fine_mass.clone(),
                    )?
                });
            }
        }
        let adjacent = if mode == RestrictionMode::Recursive {
            (0..big_l)
                .map(|l| {
                    build_transfer_between(
                        hierarchy.level(l),
                        hierarchy.level(l + 1),
                        l,
                        p,
                        kind,
                        systems[l].mass.clone(),
                        systems[l + 1].mass.clone(),
                    )
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Self::new(systems, transfers, adjacent)
    }

    /// 1D Helmholtz systems with constant wavenumber on every level.
    #[allow(clippy::too_many_arguments)]
    pub fn helmholtz_1d(
        hierarchy: &MeshHierarchy<Mesh1D>,
        kappa: f64,
        p: usize,
        boundary: Boundary1D,
        f: &dyn Fn(f64) -> c64,
        g: [c64; 2],
        mode: RestrictionMode,
    ) -> Result<Self> {
        let systems = hierarchy
            .meshes()
            .iter()
            .map(|m| assemble_1d(m, kappa, p, boundary, f, g))
            .collect::<Result<Vec<_>>>()?;
        let big_l = hierarchy.finest_level();
        let fine_mass = systems[big_l].mass.clone();
        let build = |c: usize, f: usize| {
            build_transfer_1d_between(
                hierarchy.level(c),
                hierarchy.level(f),
                c,
                p,
                kappa,
                boundary,
                systems[c].mass.clone(),
                systems[f].mass.clone(),
            )
        };
        let (transfers, adjacent) = match mode {
            RestrictionMode::Direct => (
                (0..=big_l)
                    .map(|l| if l == big_l { Ok(TransferOperator::identity(l, fine_mass.clone())) } else { build(l, big_l) })
                    .collect::<Result<Vec<_>>>()?,
                Vec::new(),
            ),
            RestrictionMode::Recursive => (Vec::new(), (0..big_l).map(|l| build(l, l + 1)).collect::<Result<Vec<_>>>()?),
        };
        Self::new(systems, transfers, adjacent)
    }

    pub fn finest_level(&self) -> usize {
        self.systems.len() - 1
    }

    pub fn finest(&self) -> &SkeletonSystem {
        self.systems.last().unwrap()
    }

    pub fn coarse_solve(&self, b: &[c64]) -> Vec<c64> {
        self.coarse.solve(b)
    }

    fn mode_for(&self, mode: RestrictionMode) -> RestrictionMode {
        match mode {
            RestrictionMode::Direct if self.transfers.is_empty() => RestrictionMode::Recursive,
            RestrictionMode::Recursive if self.adjacent.is_empty() && self.systems.len() > 1 => RestrictionMode::Direct,
            m => m,
        }
    }

    fn restrict(&self, l: usize, r: &[c64], mode: RestrictionMode) -> Vec<c64> {
        match self.mode_for(mode) {
            RestrictionMode::Direct => self.transfers[l].restrict(r),
            RestrictionMode::Recursive => {
                let mut v = r.to_vec();
                for k in (l..self.finest_level()).rev() {
                    v = self.adjacent[k].restrict(&v);
                }
                v
            }
        }
    }

    fn prolong(&self, l: usize, w: &[c64], mode: RestrictionMode) -> Vec<c64> {
        match self.mode_for(mode) {
            RestrictionMode::Direct => self.transfers[l].prolong(w),
            RestrictionMode::Recursive => {
                let mut v = w.to_vec();
                for k in l..self.finest_level() {
                    v = self.adjacent[k].prolong(&v);
                }
                v
            }
        }
    }

    /// Per-level `(level, dofs, k h / p, smoother used going down)`.
    pub fn describe(&self, plan: &CyclePlan) -> Vec<(usize, usize, f64, Option<RelaxationConfig>)> {
        self.systems
            .iter()
            .enumerate()
            .map(|(l, s)| (l, s.dim(), s.kappa_h_over_p, (l > 0).then(|| plan.smoother(s.kappa_h_over_p, true))))
            .collect()
    }
}

fn axpy(y: &mut [c64], a: f64, x: &[c64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// One correction on level `l` from the current iterate `v`.
fn correct(stack: &LevelStack, plan: &CyclePlan, l: usize, v: &mut [c64], rhs: &[c64], down: bool) -> Result<()> {
    let fine = stack.finest();
    let ax = fine.operator.mul_vec(v);
    let r: Vec<c64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    if r.iter().all(|z| *z == c64::default()) {
        return Ok(());
    }
    let rl = stack.restrict(l, &r, plan.restriction);
    let w = if l == 0 {
        stack.coarse_solve(&rl)
    } else {
        let sys = &stack.systems[l];
        smooth(&sys.operator, &rl, plan.smoother(sys.kappa_h_over_p, down))?
    };
    let update = stack.prolong(l, &w, plan.restriction);
    if update.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite(format!("correction on level {l}")));
    }
    axpy(v, plan.mu(l), &update);
    Ok(())
}

/// One multilevel cycle for `A_L v = rhs` starting from `v0`.
pub fn cycle(stack: &LevelStack, plan: &CyclePlan, v0: &[c64], rhs: &[c64]) -> Result<Vec<c64>> {
    let n = stack.finest().dim();
    if v0.len() != n || rhs.len() != n {
        return Err(Error::Dimension { expected: n, got: v0.len().min(rhs.len()), context: "cycle vectors" });
    }
    let big_l = stack.finest_level();
    let mut v = v0.to_vec();
    for l in 0..=big_l {
        correct(stack, plan, l, &mut v, rhs, true)?;
    }
    if plan.shape == CycleShape::Full {
        for l in (0..=big_l).rev() {
            correct(stack, plan, l, &mut v, rhs, false)?;
        }
    }
    Ok(v)
}

/// Side on which the cycle enters the outer GMRES iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioning {
    /// Flexible right preconditioning; the stop test uses the true residual.
    Flexible,
    /// Left preconditioning; the stop test uses the preconditioned residual
    /// as tracked by the Arnoldi recurrence. With GMRES smoothing the cycle
    /// is nonlinear and that quantity can drift from `|B(F - A u)|`.
    Left,
}

/// Outer iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub side: Preconditioning,
}

impl Default for OuterOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 300, side: Preconditioning::Flexible }
    }
}

/// Result of an outer solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<c64>,
    pub iterations: usize,
    /// Residual norms monitored by the stop test, starting with the initial one.
    pub history: Vec<f64>,
    pub converged: bool,
    /// `|F_L - A_L u| / |F_L|` of the returned solution.
    pub true_residual: f64,
}

impl SolveReport {
    fn from_outcome(o: GmresOutcome, fine: &SkeletonSystem) -> Self {
        let true_residual = relative_residual(fine, &o.x);
        Self { solution: o.x, iterations: o.iterations, history: o.history, converged: o.converged, true_residual }
    }
}

fn relative_residual(fine: &SkeletonSystem, u: &[c64]) -> f64 {
    let f = norm(&fine.rhs);
    let r = norm(&fine.residual(u));
    if f == 0.0 {
        r
    } else {
        r / f
    }
}

/// GMRES on `A_L u = F_L` preconditioned by one cycle with zero start.
pub fn pgmres_solve(stack: &LevelStack, plan: &CyclePlan, opts: OuterOptions) -> Result<SolveReport> {
    plan.validate()?;
    if !(opts.tol > 0.0 && opts.tol < 1.0) || opts.max_iter == 0 {
        return Err(Error::Config(format!("outer tolerance {} must lie in (0, 1) with max_iter >= 1", opts.tol)));
    }
    let fine = stack.finest();
    let zero = vec![c64::default(); fine.dim()];
    let pre = |r: &[c64]| cycle(stack, plan, &zero, r);
    let gopts = GmresOptions { max_iter: opts.max_iter, tol: opts.tol, ..GmresOptions::default() };
    let outcome = match opts.side {
        Preconditioning::Flexible => fgmres(&fine.operator, &fine.rhs, None, gopts, &pre)?,
        Preconditioning::Left => gmres(&fine.operator, &fine.rhs, None, gopts, Some(&pre))?,
    };
    Ok(SolveReport::from_outcome(outcome, fine))
}

/// The cycle used as a stationary iteration; the history holds `|F_L - A_L u^n|`.
pub fn iterate(stack: &LevelStack, plan: &CyclePlan, tol: f64, max_iter: usize) -> Result<SolveReport> {
    plan.validate()?;
    let fine = stack.finest();
    let mut u = vec![c64::default(); fine.dim()];
    let res = |u: &[c64]| norm(&fine.residual(u));
    let mut history = vec![res(&u)];
    let mut converged = history[0] == 0.0;
    let mut it = 0;
    while !converged && it < max_iter {
        u = cycle(stack, plan, &u, &fine.rhs)?;
        it += 1;
        history.push(res(&u));
        converged = history[it] <= tol * history[0];
    }
    let true_residual = relative_residual(fine, &u);
    Ok(SolveReport { solution: u, iterations: it, history, converged, true_residual })
}

/// Coarsest cells per side `n_0 = n_L / 2^k` with `k h_0 / p` closest to
/// `target` (in ratio), where `h_0 = sqrt(2) side / n_0`. Returns
/// `(n_0, number of levels)`.
pub fn coarsest_for(kappa: f64, p: usize, finest_n: usize, side: f64, target: f64) -> (usize, usize) {
    let mut best = (finest_n, 1);
    let mut best_gap = f64::INFINITY;
    let (mut n, mut levels) = (finest_n, 1);
    loop {
        let khp = kappa * std::f64::consts::SQRT_2 * side / n as f64 / p as f64;
        let gap = (khp / target).ln().abs();
        if gap < best_gap {
            best_gap = gap;
            best = (n, levels);
        }
        if n % 2 != 0 || n == 1 {
            break;
        }
        n /= 2;
        levels += 1;
    }
    best
}

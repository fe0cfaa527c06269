//! Experiment runner: one mode per invocation, artifacts written to `out`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use hdg_multilevel::io::{columns_csv, residuals_csv, summary_csv, svg_line_plot, vector_csv, Scale, Series, SummaryRow};
use hdg_multilevel::lfa::{
    gmres_amplification_experiment, sweep_smoother, sweep_three_level, sweep_two_level, AmplificationNorm,
    AmplificationSetup, MiddleLevel, Restriction, Smoother, StencilSymbol, Sweep, ThreeLevel, ThreeLevelParams,
    TwoLevel, TwoLevelParams,
};
use hdg_multilevel::mesh::build_hierarchy_2d;
use hdg_multilevel::multilevel::{
    coarsest_for, pgmres_solve, CyclePlan, CycleShape, LevelStack, OuterOptions, Preconditioning, RestrictionMode,
};
use hdg_multilevel::problems::{BesselProblem, CaveProblem};
use hdg_multilevel::solvers::Relaxation;
use hdg_multilevel::transfer::energy_stability_ratio;
use sha2::{Digest, Sha256};

use crate::config::{Config, ConfigError};

/// Subcommand given on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Lfa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    LfaTwoLevel,
    LfaThreeLevel,
    LfaSmoother,
    LfaGmresExperiment,
    StabilityCheck,
}

impl Mode {
    const NAMES: [(&'static str, Mode); 6] = [
        ("solve", Mode::Solve),
        ("lfa-two-level", Mode::LfaTwoLevel),
        ("lfa-three-level", Mode::LfaThreeLevel),
        ("lfa-smoother", Mode::LfaSmoother),
        ("lfa-gmres-experiment", Mode::LfaGmresExperiment),
        ("stability-check", Mode::StabilityCheck),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, m)| *m == self).unwrap().0
    }

    fn command(self) -> Command {
        match self {
            Mode::Solve | Mode::StabilityCheck => Command::Solve,
            _ => Command::Lfa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: 1, threads: 1 }
    }
}

/// Finished run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub mode: Mode,
    /// False when some solve stopped at `max_iter`.
    pub converged: bool,
    pub files: Vec<String>,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Failed(anyhow::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Failed(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Failed(e)
    }
}

impl From<hdg_multilevel::Error> for RunError {
    fn from(e: hdg_multilevel::Error) -> Self {
        RunError::Failed(e.into())
    }
}

/// Writes artifacts and remembers their names for the manifest.
struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn write(&mut self, name: &str, text: impl AsRef<[u8]>) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut dyn std::io::Write) -> std::io::Result<()>) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        f(&mut w).and_then(|_| std::io::Write::flush(&mut w)).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Parses `text`, runs the selected mode and writes the artifacts plus a
/// manifest into `out`.
pub fn run(command: Command, text: &str, out: &Path, opts: RunOptions) -> Result<Outcome, RunError> {
    let cfg = Config::parse(text)?;
    let names: Vec<&str> = Mode::NAMES.iter().map(|(n, _)| *n).collect();
    let mode_name = match (cfg.raw("", "mode"), command) {
        (Some(_), _) => cfg.choice("", "mode", &names, "solve")?,
        (None, Command::Solve) => "solve",
        (None, Command::Lfa) => return Err(ConfigError { line: None, message: "missing required key `mode`".into() }.into()),
    };
    let mode = Mode::NAMES.iter().find(|(n, _)| *n == mode_name).unwrap().1;
    if mode.command() != command {
        return Err(cfg.invalid("", "mode", format!("mode `{mode_name}` does not belong to this subcommand")).into());
    }
    if opts.threads == 0 {
        return Err(ConfigError { line: None, message: "--threads must be at least 1".into() }.into());
    }
    if opts.threads > 1 {
        log::warn!("--threads {} requested; this build runs single-threaded", opts.threads);
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let plots = cfg.get_or("output", "plots", true)?;
    let mut art = Artifacts { dir: out.to_path_buf(), files: Vec::new() };
    let converged = match mode {
        Mode::Solve => solve(&cfg, &mut art, plots)?,
        Mode::LfaTwoLevel | Mode::LfaThreeLevel => lfa_sweep(&cfg, &mut art, plots, mode == Mode::LfaThreeLevel)?,
        Mode::LfaSmoother => lfa_smoother(&cfg, &mut art, plots)?,
        Mode::LfaGmresExperiment => lfa_gmres(&cfg, &mut art, plots)?,
        Mode::StabilityCheck => stability(&cfg, &mut art, opts.seed)?,
    };
    let mut manifest = format!(
        "mode={}\nconfig_sha256={}\nseed={}\nthreads={}\nstatus={}\n",
        mode.name(),
        hex::encode(Sha256::digest(text.as_bytes())),
        opts.seed,
        opts.threads,
        if converged { "converged" } else { "max_iter" }
    );
    for f in &art.files {
        manifest.push_str(&format!("file={f}\n"));
    }
    fs::write(out.join("manifest.txt"), manifest).context("writing manifest.txt")?;
    Ok(Outcome { mode, converged, files: art.files })
}

fn positive(cfg: &Config, section: &str, key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(cfg.invalid(section, key, format!("`{key}` must be positive, got {v}")))
    }
}

fn count(cfg: &Config, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
    let v = cfg.get_or(section, key, default)?;
    if v == 0 {
        return Err(cfg.invalid(section, key, format!("`{key}` must be at least 1")));
    }
    Ok(v)
}

fn omega(cfg: &Config, section: &str) -> Result<f64, ConfigError> {
    let w = cfg.get_or(section, "omega", 0.6)?;
    if !(w > 0.0 && w <= 1.0) {
        return Err(cfg.invalid(section, "omega", format!("`omega` must lie in (0, 1], got {w}")));
    }
    Ok(w)
}

fn plan(cfg: &Config) -> Result<CyclePlan, ConfigError> {
    let s = "solver";
    let mut plan = CyclePlan::default();
    plan.alpha = cfg.get_or(s, "alpha", plan.alpha)?;
    if plan.alpha.is_nan() {
        return Err(cfg.invalid(s, "alpha", "`alpha` must be a number"));
    }
    if let Some(mu) = cfg.list::<f64>(s, "mu")? {
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(cfg.invalid(s, "mu", "damping factors must be finite"));
        }
        plan.damping = mu;
    }
    plan.linear = match cfg.choice(s, "smoother", &["gauss-seidel", "jacobi"], "gauss-seidel")? {
        "jacobi" => Relaxation::WeightedJacobi { omega: omega(cfg, s)? },
        _ => Relaxation::GaussSeidel,
    };
    let m = count(cfg, s, "m", 2)?;
    for (k, key) in ["m1", "m2", "m3", "m4"].iter().enumerate() {
        plan.steps[k] = count(cfg, s, key, m)?;
    }
    plan.shape = match cfg.choice(s, "cycle", &["full", "down"], "full")? {
        "down" => CycleShape::DownOnly,
        _ => CycleShape::Full,
    };
    plan.restriction = match cfg.choice(s, "restriction", &["direct", "recursive"], "direct")? {
        "recursive" => RestrictionMode::Recursive,
        _ => RestrictionMode::Direct,
    };
    Ok(plan)
}

fn outer(cfg: &Config) -> Result<OuterOptions, ConfigError> {
    let s = "solver";
    let d = OuterOptions::default();
    let tol = cfg.get_or(s, "tol", d.tol)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(cfg.invalid(s, "tol", format!("`tol` must lie in (0, 1), got {tol}")));
    }
    let side = match cfg.choice(s, "preconditioning", &["flexible", "left"], "flexible")? {
        "left" => Preconditioning::Left,
        _ => Preconditioning::Flexible,
    };
    Ok(OuterOptions { tol, max_iter: count(cfg, s, "max_iter", d.max_iter)?, side })
}

/// `(n_0, levels)` for each finest size.
fn hierarchies(cfg: &Config, kappa: f64, p: usize, finest: &[usize]) -> Result<Vec<(usize, usize)>, ConfigError> {
    let s = "problem";
    if cfg.has(s, "levels") && cfg.has(s, "coarsest_n") {
        return Err(cfg.invalid(s, "coarsest_n", "set either `levels` or `coarsest_n`, not both"));
    }
    let target = positive(cfg, s, "target", cfg.get_or(s, "target", 2.0)?)?;
    let mut out = Vec::new();
    for &n in finest {
        if n == 0 {
            return Err(cfg.invalid(s, "finest_n", "mesh sizes must be at least 1"));
        }
        let pair = if let Some(levels) = cfg.get::<usize>(s, "levels")? {
            let f = 1usize.checked_shl(levels.saturating_sub(1) as u32).unwrap_or(0);
            if levels == 0 || f == 0 || n % f != 0 {
                return Err(cfg.invalid(s, "levels", format!("{levels} levels do not divide finest_n = {n}")));
            }
            (n / f, levels)
        } else if let Some(n0) = cfg.get::<usize>(s, "coarsest_n")? {
            let ratio = if n0 == 0 { 0 } else { n / n0 };
            if n0 == 0 || n % n0 != 0 || !ratio.is_power_of_two() {
                return Err(cfg.invalid(s, "coarsest_n", format!("coarsest_n = {n0} does not refine to {n} by halving")));
            }
            (n0, ratio.trailing_zeros() as usize + 1)
        } else {
            coarsest_for(kappa, p, n, 1.0, target)
        };
        out.push(pair);
    }
    let mut levels: Vec<usize> = out.iter().map(|p| p.1).collect();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() != out.len() {
        return Err(cfg.invalid(s, "finest_n", "each finest size must give a different number of levels"));
    }
    Ok(out)
}

fn solve(cfg: &Config, art: &mut Artifacts, plots: bool) -> Result<bool, RunError> {
    let s = "problem";
    let kappa = positive(cfg, s, "kappa", cfg.require(s, "kappa")?)?;
    let p = count(cfg, s, "p", 1)?;
    let finest = cfg.list::<usize>(s, "finest_n")?.ok_or_else(|| cfg.invalid(s, "finest_n", "missing required key `finest_n` in [problem]"))?;
    let kind = cfg.choice(s, "kind", &["bessel", "cave"], "bessel")?;
    let problem = match kind {
        "cave" => {
            let q1 = positive(cfg, s, "q1", cfg.get_or(s, "q1", 1.0)?)?;
            let q2 = positive(cfg, s, "q2", cfg.get_or(s, "q2", 1.0)?)?;
            let cave = CaveProblem::new(kappa, q1, q2).map_err(|e| cfg.invalid(s, "kappa", e.to_string()))?;
            for &(n0, _) in &hierarchies(cfg, kappa, p, &finest)? {
                cave.check_alignment(n0).map_err(|e| cfg.invalid(s, "finest_n", e.to_string()))?;
            }
            cave.mixed(p)
        }
        _ => BesselProblem::new(kappa).map_err(|e| cfg.invalid(s, "kappa", e.to_string()))?.mixed(p),
    };
    let plan = plan(cfg)?;
    let opts = outer(cfg)?;
    let want = |k: &str| cfg.get_or("output", k, false);
    let (mm, vector, listing) = (want("matrix_market")?, want("vector")?, want("mesh_listing")?);
    let mut rows = Vec::new();
    let mut converged = true;
    for (&n, (n0, levels)) in finest.iter().zip(hierarchies(cfg, kappa, p, &finest)?) {
        let hier = build_hierarchy_2d(n0, levels)?;
        let stack = LevelStack::helmholtz_2d(&hier, &problem, plan.restriction)?;
        let dofs = stack.finest().dim();
        for (l, dim, khp, smoother) in stack.describe(&plan) {
            log::info!("n={n} level {l}: {dim} dofs, k h / p = {khp:.3}, smoother {smoother:?}");
        }
        let start = Instant::now();
        let report = pgmres_solve(&stack, &plan, opts)?;
        let seconds = start.elapsed().as_secs_f64();
        log::info!(
            "n={n}: {} levels, {dofs} dofs, {} iterations, true residual {:.3e}, {seconds:.2} s",
            levels,
            report.iterations,
            report.true_residual
        );
        converged &= report.converged;
        if !report.converged {
            log::warn!("n={n}: stopped at max_iter = {}", opts.max_iter);
        }
        art.write(&format!("residuals_{levels}.csv"), residuals_csv(&report.history))?;
        if plots {
            let k: Vec<f64> = (0..report.history.len()).map(|k| k as f64).collect();
            let r0 = report.history[0];
            let rel: Vec<f64> = report.history.iter().map(|r| r / r0).collect();
            let title = format!("relative residual, {levels} levels, {dofs} dofs");
            let svg = svg_line_plot(&title, "iteration", "|r| / |r0|", &[Series { label: "PGMRES", x: &k, y: &rel }], Scale::Log);
            art.write(&format!("residuals_{levels}.svg"), svg)?;
        }
        if mm {
            art.write_with(&format!("matrix_{levels}.mtx"), |w| stack.finest().galerkin.write_matrix_market(w, true))?;
        }
        if vector {
            art.write(&format!("solution_{levels}.csv"), vector_csv(&report.solution))?;
        }
        if listing {
            art.write_with(&format!("mesh_{levels}.txt"), |w| hier.finest().write_listing(w))?;
        }
        rows.push(SummaryRow { level: levels.to_string(), dofs, iter: report.iterations, seconds });
    }
    art.write("summary.csv", summary_csv(&rows)?)?;
    Ok(converged)
}

fn lfa_restriction(cfg: &Config) -> Result<Restriction, ConfigError> {
    Ok(match cfg.choice("lfa", "restriction", &["full-weighting", "mass-adjoint"], "full-weighting")? {
        "mass-adjoint" => Restriction::MassAdjoint,
        _ => Restriction::FullWeighting,
    })
}

fn lfa_smoother_kind(cfg: &Config) -> Result<Smoother, ConfigError> {
    Ok(match cfg.choice("lfa", "smoother", &["jacobi", "gauss-seidel"], "jacobi")? {
        "gauss-seidel" => Smoother::GaussSeidel,
        _ => Smoother::Jacobi { omega: omega(cfg, "lfa")? },
    })
}

fn t_values(cfg: &Config) -> Result<Vec<f64>, ConfigError> {
    let ts = cfg.list::<f64>("lfa", "t")?.ok_or_else(|| cfg.invalid("lfa", "t", "missing required key `t` in [lfa]"))?;
    for &t in &ts {
        positive(cfg, "lfa", "t", t)?;
    }
    Ok(ts)
}

fn lfa_sweep(cfg: &Config, art: &mut Artifacts, plots: bool, three: bool) -> Result<bool, RunError> {
    let l = "lfa";
    let ts = t_values(cfg)?;
    let samples = count(cfg, l, "samples", 1024)?;
    let smoother = lfa_smoother_kind(cfg)?;
    let restriction = lfa_restriction(cfg)?;
    let mu = [cfg.get_or(l, "mu0", 0.5)?, cfg.get_or(l, "mu1", 0.5)?, cfg.get_or(l, "mu2", 0.5)?];
    let middle = match cfg.choice(l, "middle", &["smoothed", "exact"], "smoothed")? {
        "exact" => MiddleLevel::Exact,
        _ => MiddleLevel::Smoothed(smoother),
    };
    let stem = if three { "three_level" } else { "two_level" };
    let mut summary = Vec::new();
    let mut curves: Vec<(String, Sweep)> = Vec::new();
    for &t in &ts {
        let sweep = if three {
            let params = ThreeLevelParams { fine: smoother, middle, mu, restriction };
            sweep_three_level(&ThreeLevel::new(t, params)?, samples)?
        } else {
            let params = TwoLevelParams { smoother, mu0: mu[0], mu1: mu[1], restriction };
            sweep_two_level(&TwoLevel::new(t, params)?, samples)?
        };
        log::info!("{stem} t={t}: max rho = {:.6} ({} resonant)", sweep.max, sweep.resonant.len());
        art.write(&format!("{stem}_t{t}.csv"), columns_csv("theta", &sweep.theta, &[("rho", &sweep.rho)])?)?;
        summary.push(vec![t.to_string(), samples.to_string(), sweep.max.to_string(), sweep.resonant.len().to_string()]);
        curves.push((format!("t = {t}"), sweep));
    }
    if plots {
        let series: Vec<Series> = curves.iter().map(|(n, s)| Series { label: n, x: &s.theta, y: &s.rho }).collect();
        art.write(&format!("{stem}.svg"), svg_line_plot(&format!("{stem} spectral radius"), "theta", "rho", &series, Scale::Linear))?;
    }
    art.write("lfa_summary.csv", hdg_multilevel::io::csv(&["t", "samples", "max_rho", "resonant"], &summary))?;
    Ok(true)
}

fn lfa_smoother(cfg: &Config, art: &mut Artifacts, plots: bool) -> Result<bool, RunError> {
    let samples = count(cfg, "lfa", "samples", 1024)?;
    let jac = Smoother::Jacobi { omega: omega(cfg, "lfa")? };
    let mut summary = Vec::new();
    for t in t_values(cfg)? {
        let a = StencilSymbol::new(t)?;
        let j = sweep_smoother(&a, jac, samples)?;
        let g = sweep_smoother(&a, Smoother::GaussSeidel, samples)?;
        art.write(&format!("smoother_t{t}.csv"), columns_csv("theta", &j.theta, &[("jacobi", &j.rho), ("gauss_seidel", &g.rho)])?)?;
        if plots {
            let series = [Series { label: "Jacobi", x: &j.theta, y: &j.rho }, Series { label: "Gauss-Seidel", x: &g.theta, y: &g.rho }];
            art.write(&format!("smoother_t{t}.svg"), svg_line_plot(&format!("smoother symbols, t = {t}"), "theta", "|S(theta)|", &series, Scale::Linear))?;
        }
        summary.push(vec![t.to_string(), samples.to_string(), j.max.to_string(), g.max.to_string()]);
    }
    art.write("lfa_summary.csv", hdg_multilevel::io::csv(&["t", "samples", "max_jacobi", "max_gauss_seidel"], &summary))?;
    Ok(true)
}

fn lfa_gmres(cfg: &Config, art: &mut Artifacts, plots: bool) -> Result<bool, RunError> {
    let l = "lfa";
    let d = AmplificationSetup::default();
    let setup = AmplificationSetup {
        kappa: positive(cfg, l, "kappa", cfg.get_or(l, "kappa", d.kappa)?)?,
        h: positive(cfg, l, "h", cfg.get_or(l, "h", d.h)?)?,
        interval: (cfg.get_or(l, "a", d.interval.0)?, cfg.get_or(l, "b", d.interval.1)?),
        samples: count(cfg, l, "samples", d.samples)?,
        omega: omega(cfg, l)?,
        measure: match cfg.choice(l, "measure", &["iterate", "residual"], "iterate")? {
            "residual" => AmplificationNorm::Residual,
            _ => AmplificationNorm::Iterate,
        },
    };
    if setup.interval.0 >= setup.interval.1 {
        return Err(cfg.invalid(l, "b", "the interval needs a < b").into());
    }
    let c = gmres_amplification_experiment(&setup)?;
    let cols = [("jacobi", c.jacobi.as_slice()), ("gauss_seidel", &c.gauss_seidel), ("gmres", &c.gmres)];
    art.write("amplification.csv", columns_csv("theta", &c.theta, &cols)?)?;
    if plots {
        let series: Vec<Series> = cols.iter().map(|(n, y)| Series { label: n, x: &c.theta, y }).collect();
        art.write("amplification.svg", svg_line_plot("one smoothing step", "theta", "rho_s", &series, Scale::Log))?;
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max).to_string();
    let row = vec![c.gmres_dominance().to_string(), max(&c.jacobi), max(&c.gauss_seidel), max(&c.gmres)];
    art.write("lfa_summary.csv", hdg_multilevel::io::csv(&["gmres_dominance", "max_jacobi", "max_gauss_seidel", "max_gmres"], &[row]))?;
    log::info!("GMRES no worse than both smoothers at {:.1}% of frequencies", 100.0 * c.gmres_dominance());
    Ok(true)
}

fn stability(cfg: &Config, art: &mut Artifacts, seed: u64) -> Result<bool, RunError> {
    let s = "stability";
    let ps = cfg.list::<usize>(s, "p")?.unwrap_or(vec![1, 2]);
    let ns = cfg.list::<usize>(s, "coarse_n")?.unwrap_or(vec![4, 8]);
    if ps.iter().any(|&p| p == 0) || ns.iter().any(|&n| n == 0) {
        return Err(cfg.invalid(s, if ps.contains(&0) { "p" } else { "coarse_n" }, "values must be at least 1").into());
    }
    let trials = count(cfg, s, "trials", 50)?;
    let mut rows = Vec::new();
    for &p in &ps {
        for &n in &ns {
            let r = energy_stability_ratio(&build_hierarchy_2d(n, 2)?, 0, p, trials, seed)?;
            log::info!("p={p} n={n}->{}: power {:.6}, dense {:.6}", 2 * n, r.power, r.dense);
            rows.push(vec![
                p.to_string(),
                n.to_string(),
                (2 * n).to_string(),
                r.sampled.to_string(),
                r.power.to_string(),
                r.dense.to_string(),
                r.iterations.to_string(),
            ]);
        }
    }
    let header = ["p", "n_coarse", "n_fine", "sampled", "power", "dense", "iterations"];
    art.write("stability.csv", hdg_multilevel::io::csv(&header, &rows))?;
    Ok(true)
}

//! Experiments behind the presets. Each check returns [`Outcome`]s carrying
//! the measured quantities and the verdict against its pinned tolerance.

use std::fmt;

use anyhow::{ensure, Result};
use starflow_core::analysis::{self, Violation};
use starflow_core::graph::{lp_norm, mass, pointwise_bounds, tail_mass};
use starflow_core::semigroup::{
    derivative_samples, self_similar_profile, semigroup_apply, semigroup_apply_samples,
    semigroup_derivative,
};
use starflow_core::solver::{self, Snapshot};
use starflow_core::{
    EdgeGrid, EdgeSamples, FluxFunction, GraphFunction, KernelQuadrature, Scheme,
    SolverConfig, StarGraph, Trajectory,
};

use crate::config::{ExperimentConfig, FluxKind, InitialKind, Preset};
use crate::io::{tail_radius, DecayRow};

/// Verdict on one acceptance criterion (or one part of it).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(criterion: u8, name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            criterion,
            name: name.into(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} criterion {} {}: {}", self.criterion, self.name, self.detail)
    }
}

/// A simulated run kept for output.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub snapshots: Vec<Snapshot>,
    pub junction_residuals: Vec<f64>,
    /// Indices of the snapshots written as field CSVs.
    pub export: Vec<usize>,
}

impl RunOutput {
    fn new(name: &str, trajectory: &Trajectory, flux: &FluxFunction, export_times: &[f64]) -> Self {
        let junction_residuals = trajectory
            .snapshots
            .iter()
            .map(|s| solver::junction_flux_residual(&s.field, flux))
            .collect();
        let export = trajectory
            .snapshots
            .iter()
            .enumerate()
            .filter(|(_, s)| export_times.contains(&s.time))
            .map(|(i, _)| i)
            .collect();
        Self {
            name: name.to_string(),
            snapshots: trajectory.snapshots.clone(),
            junction_residuals,
            export,
        }
    }
}

#[derive(Default)]
pub struct Report {
    pub outcomes: Vec<Outcome>,
    pub runs: Vec<RunOutput>,
    pub decay_fits: Vec<DecayRow>,
    pub scaled_errors: Vec<(f64, f64, f64)>,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

/// Applies the preset's values to every key the user left unset.
pub fn resolve(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut out = cfg.clone();
    let mut default = |key: &str, value: &str| {
        if !cfg.is_explicit(key) {
            out.set(key, value).expect("preset defaults are valid");
        }
    };
    match cfg.preset {
        Preset::LinearOracle => {
            default("flux", "zero");
            default("dt", "1e-3");
            default("t_end", "0.5");
        }
        Preset::Decay | Preset::Asymptotic => {
            // the tail beyond L - 2 must stay below 1e-10 up to t = 80
            default("L", "100");
            default("t_end", "80");
        }
        Preset::MaxPrinciple => {
            default("amplitude", "1");
            default("t_end", "20");
        }
        Preset::PicardContraction => {
            default("flux", "truncated");
            default("scheme", "picard");
            default("dt", "0.02");
            default("L", "20");
            default("N", "500");
            default("amplitude", "1");
            default("t_end", "1");
        }
        Preset::Commutator => {
            default("L", "20");
            default("N", "8000");
            default("t_end", "0.5");
        }
    }
    out
}

pub fn star(cfg: &ExperimentConfig) -> Result<(StarGraph, EdgeGrid)> {
    Ok((StarGraph::new(cfg.n_in, cfg.m_out)?, EdgeGrid::new(cfg.length, cfg.cells)?))
}

pub fn flux(cfg: &ExperimentConfig) -> Result<FluxFunction> {
    Ok(match cfg.flux {
        FluxKind::Zero => FluxFunction::Zero,
        FluxKind::PowerLaw => FluxFunction::power_law(cfg.q)?,
        FluxKind::Truncated => FluxFunction::power_law(cfg.q)?.truncate(cfg.lower, cfg.upper)?,
    })
}

pub fn solver_config(cfg: &ExperimentConfig) -> SolverConfig {
    SolverConfig {
        dt: cfg.dt,
        t_end: cfg.t_end,
        scheme: cfg.scheme,
        diffusion: cfg.diffusion,
        cfl_safety: cfg.cfl_safety,
        picard_tol: cfg.picard_tol,
        picard_max_iter: cfg.picard_max_iter,
        picard_substeps: cfg.picard_substeps,
    }
}

/// `A exp(-((s - c)/w)²)` on one edge, zero elsewhere, continuous at the
/// junction. With `amplitude = None` the discrete mass is `mass`.
pub fn gaussian_bump(
    graph: StarGraph,
    grid: EdgeGrid,
    edge: usize,
    center: f64,
    width: f64,
    amplitude: Option<f64>,
    target_mass: f64,
) -> GraphFunction {
    let shape = |s: f64| (-((s - center) / width).powi(2)).exp();
    let mut u = GraphFunction::from_fn(graph, grid, |k, s| if k == edge { shape(s) } else { 0.0 });
    u.set_junction(shape(0.0));
    zero_outer_ends(&mut u);
    let scale = amplitude.unwrap_or_else(|| target_mass / mass(&u));
    u.scaled(scale)
}

fn zero_outer_ends(u: &mut GraphFunction) {
    let n = u.grid().cells();
    for k in 0..u.graph().edge_count() {
        u.edge_mut(k)[n - 1] = 0.0;
    }
}

pub fn initial_data(cfg: &ExperimentConfig) -> Result<GraphFunction> {
    let (graph, grid) = star(cfg)?;
    Ok(match cfg.initial {
        InitialKind::GaussianBump => gaussian_bump(
            graph,
            grid,
            cfg.edge.unwrap_or(cfg.n_in),
            cfg.center,
            cfg.width,
            cfg.amplitude,
            cfg.mass,
        ),
        InitialKind::Profile => {
            let mut u = self_similar_profile(cfg.mass, graph, grid, cfg.t0)?;
            zero_outer_ends(&mut u);
            u
        }
    })
}

/// Sorted union of `required` and the user's extra times within `t_end`.
fn sample_times(required: &[f64], cfg: &ExperimentConfig) -> Vec<f64> {
    let mut times: Vec<f64> = required
        .iter()
        .chain(cfg.sample_times.iter().filter(|t| **t <= cfg.t_end))
        .copied()
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

fn uniform_times(end: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| end * i as f64 / count as f64).collect()
}

fn sup_distance(a: &GraphFunction, b: &GraphFunction) -> Result<f64> {
    Ok(lp_norm(&a.difference(b)?, f64::INFINITY)?)
}

fn halved(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut fine = cfg.clone();
    fine.cells *= 2;
    fine.dt *= 0.5;
    fine
}

/// Largest relative mass drift over the snapshots and the largest tail mass
/// beyond `L - 2`.
fn mass_and_tail(snapshots: &[Snapshot]) -> Result<(f64, f64)> {
    let m0 = mass(&snapshots[0].field);
    let mut drift = 0.0f64;
    let mut tail = 0.0f64;
    for s in snapshots {
        drift = drift.max(((mass(&s.field) - m0) / m0).abs());
        tail = tail.max(tail_mass(&s.field, tail_radius(s.field.grid().length()))?);
    }
    Ok((drift, tail))
}

fn mass_outcome(label: &str, snapshots: &[Snapshot]) -> Result<Outcome> {
    let (drift, tail) = mass_and_tail(snapshots)?;
    Ok(Outcome::new(
        2,
        format!("mass conservation ({label})"),
        drift <= 1e-8 && tail <= 1e-10,
        format!("relative drift {drift:.3e} (<= 1e-8), max tail mass {tail:.3e} (<= 1e-10)"),
    ))
}

/// Energy balance per snapshot pair relative to `‖u₀‖²`. Linear runs must
/// satisfy the identity, so the signed defect is used; otherwise only the
/// excess over the inequality counts.
fn energy_outcome(label: &str, snapshots: &[Snapshot], identity: bool) -> Outcome {
    let e0 = snapshots[0].field.integrate(|v| v * v);
    let defects = analysis::energy_balance_defects(snapshots);
    let worst = defects
        .iter()
        .map(|d| if identity { d.abs() } else { d.max(0.0) })
        .fold(0.0f64, f64::max)
        / e0;
    let kind = if identity { "|defect|" } else { "excess" };
    Outcome::new(
        9,
        format!("energy balance ({label})"),
        worst <= 1e-6,
        format!("max {kind} per snapshot pair {worst:.3e} of ||u0||^2 (<= 1e-6)"),
    )
}

/// Linear oracle run, its halved-resolution twin and the linear entropy
/// check.
pub fn linear_oracle(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let f = flux(cfg)?;
    ensure!(f.is_zero(), "linear_oracle needs flux = zero");
    let t = cfg.t_end;
    let quad = KernelQuadrature::default();
    let mut errors = Vec::new();
    for (level, c) in [cfg.clone(), halved(cfg)].iter().enumerate() {
        let u0 = initial_data(c)?;
        let times = sample_times(&uniform_times(t, 10), c);
        let traj = solver::solve(&u0, &f, &solver_config(c), &times)?;
        let exact = semigroup_apply(&u0, t, quad)?;
        errors.push(sup_distance(&traj.snapshots.last().unwrap().field, &exact)?);
        if level == 0 {
            report.outcomes.push(mass_outcome("linear run", &traj.snapshots)?);
            report.outcomes.push(energy_outcome("linear run", &traj.snapshots, true));
            report.runs.push(RunOutput::new("linear_oracle", &traj, &f, &[0.0, t]));
        }
    }
    let ratio = errors[0] / errors[1];
    report.outcomes.push(Outcome::new(
        1,
        "linear oracle equivalence",
        errors[0] <= 5e-3 && (3.5..=4.5).contains(&ratio),
        format!(
            "sup error {:.3e} (<= 5e-3), halved {:.3e}, ratio {ratio:.3} (in [3.5, 4.5])",
            errors[0], errors[1]
        ),
    ));
    report.outcomes.push(entropy_halving()?);
    Ok(())
}

/// RMS entropy residual with `ρ = s²` on `n = m = 1`, `f = 0` for a
/// Gaussian centred at `x = 1/2`, before and after halving `h`, `dt` and the
/// snapshot spacing together.
pub fn entropy_halving() -> Result<Outcome> {
    let graph = StarGraph::new(1, 1)?;
    let mut rms = Vec::new();
    for level in [1usize, 2] {
        let grid = EdgeGrid::new(20.0, 500 * level)?;
        let mut u0 = GraphFunction::from_fn(graph, grid, |k, s| {
            let x = graph.orientation(k) * s;
            (-((x - 0.5) / 0.5).powi(2)).exp()
        });
        zero_outer_ends(&mut u0);
        let spacing = 0.1 / level as f64;
        let times: Vec<f64> = (0..=20 * level).map(|i| 1.0 + i as f64 * spacing).collect();
        let cfg = SolverConfig::new(1e-3 / level as f64, 3.0);
        let traj = solver::solve(&u0, &FluxFunction::Zero, &cfg, &times)?;
        let residuals = analysis::entropy_residual(&traj.snapshots, &FluxFunction::Zero, |_| 2.0, graph)?;
        let mean_square = residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64;
        rms.push(mean_square.sqrt());
    }
    let ratio = rms[0] / rms[1];
    Ok(Outcome::new(
        9,
        "entropy identity under halving",
        (3.5..=4.5).contains(&ratio),
        format!("rms residual {:.3e} -> {:.3e}, ratio {ratio:.3} (in [3.5, 4.5])", rms[0], rms[1]),
    ))
}

pub const DECAY_WINDOW: (f64, f64) = (5.0, 50.0);
pub const PROFILE_TIMES: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

fn decay_run(cfg: &ExperimentConfig) -> Result<(GraphFunction, FluxFunction, Trajectory)> {
    let f = flux(cfg)?;
    let u0 = initial_data(cfg)?;
    let steps = (cfg.t_end * 2.0).round().max(1.0) as usize;
    let mut required = uniform_times(cfg.t_end, steps);
    required.extend(PROFILE_TIMES.iter().filter(|t| **t <= cfg.t_end));
    let times = sample_times(&required, cfg);
    let traj = solver::solve(&u0, &f, &solver_config(cfg), &times)?;
    Ok((u0, f, traj))
}

/// Decay exponents, mass conservation and the energy inequality on the
/// nonlinear run.
pub fn decay(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let (_, f, traj) = decay_run(cfg)?;
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
    let mut verdicts = Vec::new();
    for (p, expected) in [(f64::INFINITY, -0.5), (2.0, -0.25)] {
        let norms = traj
            .snapshots
            .iter()
            .map(|s| lp_norm(&s.field, p))
            .collect::<Result<Vec<_>, _>>()?;
        let fit = analysis::decay_fit(&times, &norms, DECAY_WINDOW)?;
        verdicts.push(((fit.exponent - expected).abs() <= 0.05, p, fit.exponent, expected));
        report.decay_fits.push(DecayRow {
            p,
            fit,
            window: DECAY_WINDOW,
        });
    }
    let detail = verdicts
        .iter()
        .map(|(_, p, e, x)| format!("p={p}: exponent {e:.4} (target {x} +/- 0.05)"))
        .collect::<Vec<_>>()
        .join(", ");
    report.outcomes.push(Outcome::new(
        4,
        "decay exponents",
        verdicts.iter().all(|v| v.0),
        detail,
    ));
    report.outcomes.push(mass_outcome("nonlinear run", &traj.snapshots)?);
    report.outcomes.push(energy_outcome("nonlinear run", &traj.snapshots, false));
    let export: Vec<f64> = [0.0].into_iter().chain(PROFILE_TIMES).collect();
    report.runs.push(RunOutput::new("decay", &traj, &f, &export));
    Ok(())
}

/// Scaled `L¹` distance to the self-similar profile along the decay run,
/// plus the profile self-similarity check.
pub fn asymptotic(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let (u0, f, traj) = decay_run(cfg)?;
    let mass0 = mass(&u0);
    let mut values = Vec::new();
    for t in PROFILE_TIMES.iter().filter(|t| **t <= cfg.t_end) {
        let snap = traj.snapshots.iter().find(|s| s.time == *t).expect("profile time sampled");
        let v = analysis::scaled_profile_error(&snap.field, *t, mass0, 1.0)?;
        report.scaled_errors.push((*t, 1.0, v));
        values.push(v);
    }
    let decreasing = values.windows(2).all(|w| w[1] <= 1.05 * w[0]);
    let halved = values.len() >= 2 && values[values.len() - 1] < 0.5 * values[0];
    let listed = values.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>().join(", ");
    report.outcomes.push(Outcome::new(
        5,
        "asymptotic profile convergence",
        values.len() == PROFILE_TIMES.len() && decreasing && halved,
        format!("scaled L1 errors at t = 10, 20, 40, 80: {listed}; last/first {:.3} (< 0.5)", values.last().unwrap_or(&f64::NAN) / values.first().unwrap_or(&f64::NAN)),
    ));
    report.runs.push(RunOutput::new("asymptotic", &traj, &f, &PROFILE_TIMES));
    report.outcomes.push(self_similarity(cfg)?);
    Ok(())
}

/// `scale_function(u_M(λ²t₀), λ)` against `u_M(t₀)` for `λ ∈ {2, 4, 8}`.
pub fn self_similarity(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (graph, grid) = star(cfg)?;
    let mut worst = 0.0f64;
    for lambda in [2.0, 4.0, 8.0] {
        let late = self_similar_profile(cfg.mass, graph, grid, lambda * lambda * cfg.t0)?;
        let scaled = analysis::scale_function(&late, lambda)?;
        let exact = self_similar_profile(cfg.mass, graph, scaled.grid(), cfg.t0)?;
        let peak = lp_norm(&exact, f64::INFINITY)?;
        worst = worst.max(sup_distance(&scaled, &exact)? / peak);
    }
    Ok(Outcome::new(
        6,
        "profile self-similarity",
        worst <= 1e-10,
        format!("max relative sup error over lambda in {{2, 4, 8}}: {worst:.3e} (<= 1e-10)"),
    ))
}

/// Maximum principle along every step of a CFL-limited run.
pub fn max_principle(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let f = flux(cfg)?;
    let u0 = initial_data(cfg)?;
    let (lo, hi) = pointwise_bounds(&u0);
    let (lower, upper) = (lo.min(0.0), hi.max(0.0));
    let times = sample_times(&uniform_times(cfg.t_end, 20), cfg);
    let traj = solver::solve(&u0, &f, &solver_config(cfg), &times)?;
    let step_min = traj.records.iter().map(|r| r.min).fold(f64::INFINITY, f64::min);
    let step_max = traj.records.iter().map(|r| r.max).fold(f64::NEG_INFINITY, f64::max);
    let slack = analysis::BOUND_SLACK;
    let violations = analysis::max_principle_report(&traj.snapshots, lower, upper);
    let passed = violations.is_empty() && step_min >= lower - slack && step_max <= upper + slack;
    report.outcomes.push(Outcome::new(
        3,
        "maximum principle",
        passed,
        format!(
            "{} steps, sample range [{step_min:.3e}, {step_max:.12}] within [{lower}, {upper}] +/- 1e-12, {} snapshot violations",
            traj.records.len(),
            violations.len()
        ),
    ));
    report.violations.extend(violations);
    report.runs.push(RunOutput::new("max_principle", &traj, &f, &[0.0, cfg.t_end]));
    Ok(())
}

/// `‖∂ₓS(t)φ - S(t)∂ₓφ‖∞` on the line graph and the order of the closed
/// form against centred differences on `n = 1, m = 2`.
pub fn commutator(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let t = cfg.t_end;
    let quad = KernelQuadrature::default();
    let grid = EdgeGrid::new(cfg.length, cfg.cells)?;

    let line = StarGraph::new(1, 1)?;
    let center = 0.3;
    let phi = GraphFunction::from_fn(line, grid, |k, s| {
        let x = line.orientation(k) * s;
        (-(x - center) * (x - center)).exp()
    });
    let slope_exact = EdgeSamples::from_fn(line, grid, |k, s| {
        let x = line.orientation(k) * s;
        -2.0 * (x - center) * (-(x - center) * (x - center)).exp()
    });
    let closed = semigroup_derivative(&phi, t, quad)?;
    let sampled = semigroup_apply_samples(&derivative_samples(&phi.to_samples()), t, quad)?;
    let analytic = semigroup_apply_samples(&slope_exact, t, quad)?;
    let gap_sampled = closed.sup_distance(&sampled)?;
    let gap_analytic = closed.sup_distance(&analytic)?;
    report.outcomes.push(Outcome::new(
        7,
        "commutator vanishes for n = m = 1",
        gap_sampled <= 1e-6 && gap_analytic <= 1e-6,
        format!(
            "sup gap {gap_sampled:.3e} with differenced slope, {gap_analytic:.3e} with exact slope (<= 1e-6)"
        ),
    ));

    let graph = StarGraph::new(1, 2)?;
    let slopes = [0.7, -0.4, 1.3];
    let mut errors = Vec::new();
    for cells in [cfg.cells / 2, cfg.cells] {
        let grid = EdgeGrid::new(cfg.length, cells)?;
        let phi = GraphFunction::from_fn(graph, grid, |k, s| (-(s * s)).exp() * (1.0 + slopes[k] * s));
        let closed = semigroup_derivative(&phi, t, quad)?;
        let differenced = derivative_samples(&semigroup_apply(&phi, t, quad)?.to_samples());
        errors.push(closed.sup_distance(&differenced)?);
    }
    let ratio = errors[0] / errors[1];
    report.outcomes.push(Outcome::new(
        7,
        "commutator closed form for n = 1, m = 2",
        (3.5..=4.5).contains(&ratio),
        format!(
            "sup gap to centred differences {:.3e} -> {:.3e} under halving h, ratio {ratio:.3} (in [3.5, 4.5])",
            errors[0], errors[1]
        ),
    ));
    Ok(())
}

/// Picard slabs on the truncated flux against the IMEX run with the
/// substep as time step.
pub fn picard_contraction(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let f = flux(cfg)?;
    let u0 = initial_data(cfg)?;
    let mut picard_cfg = solver_config(cfg);
    picard_cfg.scheme = Scheme::Picard;
    let times = sample_times(&[cfg.t_end], cfg);
    let traj = solver::solve(&u0, &f, &picard_cfg, &times)?;

    let mut imex_cfg = picard_cfg.clone();
    imex_cfg.scheme = Scheme::Imex;
    imex_cfg.dt = cfg.dt / cfg.picard_substeps as f64;
    let imex = solver::solve(&u0, &f, &imex_cfg, &times)?;

    let worst_ratio = traj
        .picard
        .iter()
        .flat_map(|r| r.ratios())
        .fold(0.0f64, f64::max);
    let all_converged = traj.picard.iter().all(|r| r.converged);
    let max_iterations = traj.picard.iter().map(|r| r.iterations).max().unwrap_or(0);
    let gap = sup_distance(
        &traj.snapshots.last().unwrap().field,
        &imex.snapshots.last().unwrap().field,
    )?;
    let lipschitz = solver::flux_lipschitz(&u0, &f);
    report.outcomes.push(Outcome::new(
        8,
        "picard contraction",
        worst_ratio <= 0.55 && all_converged && gap <= 1e-6,
        format!(
            "{} slabs, dt*L_f^2 = {:.3}, worst residual ratio {worst_ratio:.4} (<= 0.55), max iterations {max_iterations} of {}, all converged: {all_converged}, sup gap to IMEX {gap:.3e} (<= 1e-6)",
            traj.picard.len(),
            cfg.dt * lipschitz * lipschitz,
            cfg.picard_max_iter
        ),
    ));
    report.runs.push(RunOutput::new("picard", &traj, &f, &times));
    Ok(())
}

/// Runs the checks of `cfg.preset` after resolving preset defaults.
pub fn run_preset(cfg: &ExperimentConfig) -> Result<Report> {
    let cfg = resolve(cfg);
    cfg.validate().map_err(anyhow::Error::msg)?;
    let mut report = Report::default();
    match cfg.preset {
        Preset::LinearOracle => linear_oracle(&cfg, &mut report)?,
        Preset::Decay => decay(&cfg, &mut report)?,
        Preset::Asymptotic => asymptotic(&cfg, &mut report)?,
        Preset::MaxPrinciple => max_principle(&cfg, &mut report)?,
        Preset::PicardContraction => picard_contraction(&cfg, &mut report)?,
        Preset::Commutator => commutator(&cfg, &mut report)?,
    }
    Ok(report)
}

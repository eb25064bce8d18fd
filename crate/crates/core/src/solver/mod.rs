//! Time integration of `u_t + f(u)_x = u_xx` on the star.
//!
//! [`Scheme::Imex`] advances with explicit Engquist–Osher convection and an
//! implicit θ-scheme for diffusion. [`Scheme::Picard`] splits each slab into
//! substeps and iterates the convective source to a fixed point; the fixed
//! point is the IMEX trajectory with the substep as time step.

mod convection;
mod diffusion;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::graph::{self, GraphFunction};
use crate::math::{self, CompensatedSum};

pub use convection::eo_flux;
pub use diffusion::{apply_laplacian, assemble_diffusion_solve};

/// Lower bound on the wave speed in [`cfl_dt`].
pub const SPEED_FLOOR: f64 = 1e-12;
/// Sup norm beyond which a run is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Imex,
    Picard,
}

/// Time weighting of the implicit diffusion solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffusionRule {
    #[default]
    CrankNicolson,
    BackwardEuler,
}

impl DiffusionRule {
    /// Implicit weight `θ` in `(I - θ dt Δ) uⁿ⁺¹ = (I + (1-θ) dt Δ) uⁿ + ...`.
    pub fn weight(self) -> f64 {
        match self {
            DiffusionRule::CrankNicolson => 0.5,
            DiffusionRule::BackwardEuler => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Largest step for [`Scheme::Imex`]; the slab length for
    /// [`Scheme::Picard`].
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub diffusion: DiffusionRule,
    pub cfl_safety: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Substeps per Picard slab.
    pub picard_substeps: usize,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            scheme: Scheme::Imex,
            diffusion: DiffusionRule::CrankNicolson,
            cfl_safety: 0.5,
            picard_tol: 1e-10,
            picard_max_iter: 50,
            picard_substeps: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config("dt must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config("t_end must be positive"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Config("cfl_safety must lie in (0, 1]"));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::Config("picard_tol must be positive"));
        }
        if self.picard_max_iter == 0 || self.picard_substeps == 0 {
            return Err(Error::Config("picard iteration counts must be positive"));
        }
        Ok(())
    }
}

/// Diagnostics of one accepted step (one slab for Picard).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Time at the end of the step.
    pub time: f64,
    pub dt: f64,
    pub mass: f64,
    pub min: f64,
    pub max: f64,
    pub l2_squared: f64,
    /// `∫ ‖∂ₓu‖² dt` over the step, the gradient taken at the time-centred
    /// state of every (sub)step.
    pub dissipation: f64,
    /// `‖u‖² + 2∫₀ᵗ ‖∂ₓu‖²` at the end of the step.
    pub energy_lhs: f64,
    /// `∫ 2(n-m)Φ(u(0)) dt` over the step, `Φ` the antiderivative of `f`.
    pub junction_term: f64,
    /// Flux balance residual at the junction at the end of the step.
    pub junction_residual: f64,
    /// Mass that left through the outer ends during the step.
    pub outer_leak: f64,
}

/// Outcome of the fixed-point iteration on one Picard slab.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub iterations: usize,
    /// `sup_t ‖w^{k+1}(t) - w^k(t)‖₂` over the slab, one entry per iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl PicardReport {
    /// Successive residual ratios; the first ratio compares iterations 2
    /// and 1.
    pub fn ratios(&self) -> Vec<f64> {
        self.residuals
            .windows(2)
            .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    field: GraphFunction,
    time: f64,
    clock: CompensatedSum,
    step_count: usize,
    dissipated: CompensatedSum,
    diagnostics: Vec<StepRecord>,
}

impl SimulationState {
    pub fn new(field: GraphFunction) -> Self {
        let l2 = field.integrate(|v| v * v);
        Self {
            field,
            time: 0.0,
            clock: CompensatedSum::new(0.0),
            step_count: 0,
            dissipated: CompensatedSum::new(l2),
            diagnostics: Vec::new(),
        }
    }

    pub fn field(&self) -> &GraphFunction {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn diagnostics(&self) -> &[StepRecord] {
        &self.diagnostics
    }

    /// `‖u‖² + 2∫₀ᵗ ‖∂ₓu‖²` at the current time.
    pub fn energy_lhs(&self) -> f64 {
        self.dissipated.value()
    }

    fn accept(&mut self, field: GraphFunction, step: StepTotals, landing: Option<f64>, f: &FluxFunction) {
        self.clock.add(step.dt);
        self.time = landing.unwrap_or_else(|| self.clock.value());
        self.step_count += 1;
        let l2 = field.integrate(|v| v * v);
        // ‖u‖² is replaced, the dissipation integral accumulates
        let previous_l2 = self.field.integrate(|v| v * v);
        self.dissipated.add(l2 - previous_l2);
        self.dissipated.add(2.0 * step.dissipation);
        let (min, max) = graph::pointwise_bounds(&field);
        self.diagnostics.push(StepRecord {
            time: self.time,
            dt: step.dt,
            mass: graph::mass(&field),
            min,
            max,
            l2_squared: l2,
            dissipation: step.dissipation,
            energy_lhs: self.dissipated.value(),
            junction_term: step.junction_term,
            junction_residual: junction_flux_residual(&field, f),
            outer_leak: step.outer_leak,
        });
        self.field = field;
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct StepTotals {
    dt: f64,
    dissipation: f64,
    junction_term: f64,
    outer_leak: f64,
}

impl StepTotals {
    fn absorb(&mut self, other: StepTotals) {
        self.dt += other.dt;
        self.dissipation += other.dissipation;
        self.junction_term += other.junction_term;
        self.outer_leak += other.outer_leak;
    }
}

/// Field at a requested sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: GraphFunction,
    /// `‖u‖² + 2∫₀ᵗ ‖∂ₓu‖²` at `time`.
    pub energy_lhs: f64,
    pub step_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// One record per accepted step, in time order.
    pub records: Vec<StepRecord>,
    /// One report per slab for Picard runs; empty otherwise.
    pub picard: Vec<PicardReport>,
}

/// Admissible explicit step `safety·h / max(SPEED_FLOOR, max |f'(u)|)`,
/// capped by `configured`. A zero flux returns `configured`.
pub fn cfl_dt(u: &GraphFunction, f: &FluxFunction, h: f64, safety: f64, configured: f64) -> f64 {
    if f.is_zero() {
        return configured;
    }
    let speed = u.samples().fold(0.0f64, |acc, v| acc.max(f.derivative(v).abs()));
    configured.min(safety * h / speed.max(SPEED_FLOOR))
}

/// `Σ_in (f(u) - ∂ₓu)(0) - Σ_out (f(u) - ∂ₓu)(0)` with one-sided differences
/// in the physical coordinate.
pub fn junction_flux_residual(u: &GraphFunction, f: &FluxFunction) -> f64 {
    let g = u.graph();
    let h = u.grid().spacing();
    let j = u.junction();
    let fj = f.eval(j);
    let mut total = 0.0;
    for k in 0..g.edge_count() {
        let dx = g.orientation(k) * (u.edge(k)[0] - j) / h;
        if g.is_incoming(k) {
            total += fj - dx;
        } else {
            total -= fj - dx;
        }
    }
    total
}

/// Mass that leaves through the outer ends per unit time under `Δ_h`.
fn diffusive_outflow(u: &GraphFunction) -> f64 {
    let n = u.grid().cells();
    let h = u.grid().spacing();
    (0..u.graph().edge_count()).map(|k| u.edge(k)[n - 2]).sum::<f64>() / h
}

fn junction_energy_rate(u: &GraphFunction, f: &FluxFunction) -> f64 {
    let g = u.graph();
    let imbalance = g.n_in() as f64 - g.m_out() as f64;
    if imbalance == 0.0 || f.is_zero() {
        0.0
    } else {
        2.0 * imbalance * f.antiderivative(u.junction())
    }
}

fn midpoint(a: &GraphFunction, b: &GraphFunction) -> Result<GraphFunction> {
    GraphFunction::combine(0.5, a, 0.5, b)
}

/// One θ-step from `u` with the convective rate `rate` frozen.
fn theta_step(
    u: &GraphFunction,
    rate: &GraphFunction,
    dt: f64,
    rule: DiffusionRule,
) -> Result<GraphFunction> {
    let theta = rule.weight();
    let mut rhs = GraphFunction::combine(1.0, u, dt, rate)?;
    if theta < 1.0 {
        let lap = apply_laplacian(u);
        rhs = GraphFunction::combine(1.0, &rhs, (1.0 - theta) * dt, &lap)?;
    }
    assemble_diffusion_solve(&rhs, dt, theta)
}

/// Diagnostics of the step `u → next` driven by the convective rate of `u`.
fn step_totals(
    u: &GraphFunction,
    next: &GraphFunction,
    convective_outflow: f64,
    dt: f64,
    rule: DiffusionRule,
    f: &FluxFunction,
) -> Result<StepTotals> {
    let theta = rule.weight();
    let centre = midpoint(u, next)?;
    let diffusive = (1.0 - theta) * diffusive_outflow(u) + theta * diffusive_outflow(next);
    Ok(StepTotals {
        dt,
        dissipation: dt * graph::gradient_energy(&centre),
        junction_term: dt * junction_energy_rate(&centre, f),
        outer_leak: dt * (convective_outflow + diffusive),
    })
}

fn check_divergence(u: &GraphFunction, time: f64) -> Result<()> {
    let sup = u.samples().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !(sup <= DIVERGENCE_BOUND) {
        return Err(Error::Diverged { time, sup });
    }
    Ok(())
}

fn advance_imex(
    state: &mut SimulationState,
    f: &FluxFunction,
    cfg: &SolverConfig,
    dt: f64,
    landing: Option<f64>,
) -> Result<()> {
    let u = &state.field;
    let admissible = cfl_dt(u, f, u.grid().spacing(), cfg.cfl_safety, f64::INFINITY);
    if dt > admissible * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, admissible });
    }
    let conv = convection::convective_rate(u, f);
    let next = theta_step(u, &conv.rate, dt, cfg.diffusion)?;
    let totals = step_totals(u, &next, conv.outer_outflow, dt, cfg.diffusion, f)?;
    check_divergence(&next, state.time + dt)?;
    state.accept(next, totals, landing, f);
    Ok(())
}

/// One IMEX step of length `cfg.dt`.
pub fn step_imex(state: &mut SimulationState, f: &FluxFunction, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    advance_imex(state, f, cfg, cfg.dt, None)
}

/// `max |f'|` over `[min(0, min u), max(0, max u)]`.
pub fn flux_lipschitz(u: &GraphFunction, f: &FluxFunction) -> f64 {
    let (lo, hi) = graph::pointwise_bounds(u);
    f.max_abs_derivative(lo.min(0.0), hi.max(0.0))
}

/// Largest slab accepted by the Picard precondition `dt·L_f² < 1/4`.
pub fn picard_admissible_dt(lipschitz: f64) -> f64 {
    if lipschitz == 0.0 {
        f64::INFINITY
    } else {
        0.25 / (lipschitz * lipschitz)
    }
}

fn advance_picard(
    state: &mut SimulationState,
    f: &FluxFunction,
    cfg: &SolverConfig,
    slab: f64,
    landing: Option<f64>,
) -> Result<PicardReport> {
    let u0 = state.field.clone();
    let lipschitz = flux_lipschitz(&u0, f);
    let admissible = picard_admissible_dt(lipschitz);
    if !(slab < admissible) {
        return Err(Error::PicardPrecondition {
            dt: slab,
            lipschitz,
            admissible,
        });
    }
    let substeps = cfg.picard_substeps;
    let delta = slab / substeps as f64;
    let cfl = cfl_dt(&u0, f, u0.grid().spacing(), cfg.cfl_safety, f64::INFINITY);
    if delta > cfl * (1.0 + 1e-12) {
        return Err(Error::CflViolation {
            dt: delta,
            admissible: cfl,
        });
    }

    // iterate w^{k+1}_{j+1} = θ-step(w^{k+1}_j) with the convective source
    // frozen at w^k_j; w^0 is the initial state held over the slab
    let mut previous: Vec<GraphFunction> = (0..=substeps).map(|_| u0.clone()).collect();
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut growth = 0;
    let mut sweeps = 0;
    while residuals.len() < cfg.picard_max_iter {
        let sources: Vec<_> = previous[..substeps]
            .iter()
            .map(|w| convection::convective_rate(w, f))
            .collect();
        let mut current = Vec::with_capacity(substeps + 1);
        current.push(u0.clone());
        for source in &sources {
            let next = theta_step(current.last().unwrap(), &source.rate, delta, cfg.diffusion)?;
            current.push(next);
        }
        let mut residual = 0.0f64;
        for (a, b) in current.iter().zip(&previous).skip(1) {
            residual = residual.max(graph::lp_norm(&a.difference(b)?, 2.0)?);
        }
        check_divergence(&current[substeps], state.time + slab)?;
        previous = current;
        sweeps += 1;
        // the first sweep only builds the initial iterate
        if sweeps == 1 {
            continue;
        }
        if let Some(&last) = residuals.last() {
            if residual > last {
                growth += 1;
            } else {
                growth = 0;
            }
        }
        residuals.push(residual);
        if growth >= 3 {
            return Err(Error::NonContraction { residuals });
        }
        if residual < cfg.picard_tol {
            converged = true;
            break;
        }
    }

    let mut totals = StepTotals::default();
    for j in 0..substeps {
        let conv = convection::convective_rate(&previous[j], f);
        totals.absorb(step_totals(
            &previous[j],
            &previous[j + 1],
            conv.outer_outflow,
            delta,
            cfg.diffusion,
            f,
        )?);
    }
    totals.dt = slab;
    let last = previous.pop().unwrap();
    state.accept(last, totals, landing, f);
    Ok(PicardReport {
        iterations: residuals.len(),
        residuals,
        converged,
    })
}

/// One Picard slab of length `cfg.dt`.
pub fn step_picard(state: &mut SimulationState, f: &FluxFunction, cfg: &SolverConfig) -> Result<PicardReport> {
    cfg.validate()?;
    advance_picard(state, f, cfg, cfg.dt, None)
}

/// Integrates from `u0` and records a snapshot at every sample time. The
/// step is shrunk so that each sample time is hit exactly.
pub fn solve(
    u0: &GraphFunction,
    f: &FluxFunction,
    cfg: &SolverConfig,
    sample_times: &[f64],
) -> Result<Trajectory> {
    cfg.validate()?;
    if sample_times.is_empty() {
        return Err(Error::SampleTimes("no sample times"));
    }
    if sample_times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::SampleTimes("sample times must be non-negative"));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::SampleTimes("sample times must be ascending"));
    }
    if *sample_times.last().unwrap() > cfg.t_end {
        return Err(Error::SampleTimes("sample time beyond t_end"));
    }

    let h = u0.grid().spacing();
    let mut state = SimulationState::new(u0.clone());
    let mut snapshots = Vec::with_capacity(sample_times.len());
    let mut picard = Vec::new();
    for &target in sample_times {
        while state.time < target {
            let remaining = target - state.time;
            let cap = match cfg.scheme {
                Scheme::Imex => cfl_dt(&state.field, f, h, cfg.cfl_safety, cfg.dt),
                Scheme::Picard => cfg.dt,
            };
            let steps = math::ceil(remaining / cap - 1e-9).max(1.0);
            let dt = remaining / steps;
            let landing = if steps == 1.0 { Some(target) } else { None };
            match cfg.scheme {
                Scheme::Imex => advance_imex(&mut state, f, cfg, dt, landing)?,
                Scheme::Picard => picard.push(advance_picard(&mut state, f, cfg, dt, landing)?),
            }
        }
        snapshots.push(Snapshot {
            time: target,
            field: state.field.clone(),
            energy_lhs: state.energy_lhs(),
            step_count: state.step_count,
        });
    }
    Ok(Trajectory {
        snapshots,
        records: state.diagnostics,
        picard,
    })
}

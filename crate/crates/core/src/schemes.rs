//! Explicit time integration of the reduced ternary system.
//!
//! Two schemes share the same building blocks:
//!
//! * **global linearization**: one explicit Euler update per step, with the
//!   flux relation re-evaluated at the freshly updated composition;
//! * **Richardson local linearization**: within one step, `K` fixed-point
//!   sweeps `ξᵏ = ξⁿ + Δt·D₊N(ξᵏ⁻¹)` starting from `ξ⁰ = ξⁿ`.
//!
//! The `D₊` stencil equals minus the flux divergence, hence the `+` in the
//! update. Fluxes live on the faces `j + ½` that pair with the `D₋` gradient;
//! the slot `N_J` lies outside the domain and is pinned to zero, while row 0 of
//! `D₊` already closes the left wall.

use std::fmt;
use std::str::FromStr;

use crate::diagnostics::{RunInfo, Snapshot, TimeSeries};
use crate::error::{Error, Result};
use crate::grid::{diff_backward_into, diff_forward_into, Grid1D, NodalField};
use crate::mixture::{FluxSystem, MixtureSpec, NodeComposition, SIMPLEX_TOLERANCE};

/// Relative slack allowed when checking that `dt` divides the run length.
pub const STEP_FIT_TOLERANCE: f64 = 1e-9;

/// Mole fractions of species 1 and 2 at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState {
    pub xi1: NodalField,
    pub xi2: NodalField,
    pub t: f64,
}

impl MixtureState {
    pub fn new(xi1: NodalField, xi2: NodalField, t: f64) -> Self {
        Self { xi1, xi2, t }
    }

    pub fn uniform(grid: &Grid1D, xi1: f64, xi2: f64) -> Self {
        let n = grid.node_count();
        Self::new(NodalField::constant(n, xi1), NodalField::constant(n, xi2), 0.0)
    }

    pub fn node(&self, j: usize) -> NodeComposition {
        NodeComposition::new(self.xi1[j], self.xi2[j])
    }

    /// Checks field lengths and simplex membership within `tol`.
    pub fn validate(&self, grid: &Grid1D, tol: f64) -> Result<()> {
        grid.check(&self.xi1)?;
        grid.check(&self.xi2)?;
        for j in 0..self.xi1.len() {
            if !self.node(j).is_admissible(tol) {
                return Err(Error::InadmissibleState {
                    node: j,
                    xi1: self.xi1[j],
                    xi2: self.xi2[j],
                });
            }
        }
        Ok(())
    }
}

/// Molar fluxes of species 1 and 2 at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField {
    pub n1: NodalField,
    pub n2: NodalField,
}

impl FluxField {
    pub fn zeros(grid: &Grid1D) -> Self {
        Self {
            n1: NodalField::zeros(grid.node_count()),
            n2: NodalField::zeros(grid.node_count()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Global,
    Richardson,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::Global => "global",
            SchemeKind::Richardson => "richardson",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "global" => Ok(SchemeKind::Global),
            "richardson" => Ok(SchemeKind::Richardson),
            other => Err(Error::Scheme(format!(
                "unknown scheme '{other}' (expected global or richardson)"
            ))),
        }
    }
}

/// How the time step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    /// The explicit stability bound divided by `divisor`, shrunk to the
    /// largest value that divides the run length into whole steps.
    Cfl { divisor: u32 },
    Fixed(f64),
}

impl DtPolicy {
    pub const CFL: DtPolicy = DtPolicy::Cfl { divisor: 1 };

    /// Concrete step for a run of length `duration`.
    pub fn resolve(&self, grid: &Grid1D, spec: &MixtureSpec, duration: f64) -> Result<f64> {
        match *self {
            DtPolicy::Cfl { divisor } => {
                let bound = cfl_time_step(grid, spec, 1.0);
                let coarse = (duration / bound * (1.0 - 1e-12)).ceil().max(1.0);
                Ok(duration / (coarse * divisor as f64))
            }
            DtPolicy::Fixed(dt) => {
                if !(dt.is_finite() && dt > 0.0) {
                    return Err(Error::Scheme(format!("dt must be positive, got {dt}")));
                }
                step_count(duration, dt)?;
                Ok(dt)
            }
        }
    }
}

impl fmt::Display for DtPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DtPolicy::Cfl { divisor: 1 } => f.write_str("cfl"),
            DtPolicy::Cfl { divisor } => write!(f, "cfl/{divisor}"),
            DtPolicy::Fixed(dt) => write!(f, "{dt}"),
        }
    }
}

impl FromStr for DtPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Scheme(format!("cannot read dt '{s}' (cfl, cfl/<n> or a number)"));
        if s == "cfl" {
            return Ok(DtPolicy::CFL);
        }
        if let Some(rest) = s.strip_prefix("cfl/") {
            let divisor: u32 = rest.trim().parse().map_err(|_| bad())?;
            if divisor == 0 {
                return Err(bad());
            }
            return Ok(DtPolicy::Cfl { divisor });
        }
        let dt: f64 = s.parse().map_err(|_| bad())?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Scheme(format!("dt must be positive, got {s}")));
        }
        Ok(DtPolicy::Fixed(dt))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub dt: f64,
    /// Richardson sweeps per step; ignored by the global scheme.
    pub k_iters: usize,
    pub t_end: f64,
    pub snapshot_stride: usize,
}

impl SchemeConfig {
    pub fn global(dt: f64, t_end: f64) -> Self {
        Self {
            kind: SchemeKind::Global,
            dt,
            k_iters: 1,
            t_end,
            snapshot_stride: 1,
        }
    }

    pub fn richardson(dt: f64, k_iters: usize, t_end: f64) -> Self {
        Self {
            kind: SchemeKind::Richardson,
            dt,
            k_iters,
            t_end,
            snapshot_stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Scheme(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Scheme(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.kind == SchemeKind::Richardson && self.k_iters == 0 {
            return Err(Error::Scheme("k_iters must be at least 1".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Scheme("snapshot_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// `safety · Δx² / (2 max D)`.
pub fn cfl_time_step(grid: &Grid1D, spec: &MixtureSpec, safety: f64) -> f64 {
    safety * grid.dx() * grid.dx() / (2.0 * spec.max_diffusivity())
}

/// Number of whole steps of size `dt` covering `duration`.
pub fn step_count(duration: f64, dt: f64) -> Result<usize> {
    let n = (duration / dt).round();
    if n < 1.0 || ((n * dt - duration).abs() > STEP_FIT_TOLERANCE * duration) {
        return Err(Error::Scheme(format!(
            "dt = {dt} does not divide the run length {duration}"
        )));
    }
    Ok(n as usize)
}

fn fluxes_into(
    xi1: &[f64],
    xi2: &[f64],
    system: &FluxSystem,
    dx: f64,
    flux: &mut FluxField,
) -> Result<()> {
    // D₋ξ into the flux buffers, then overwrite in place with N = M⁻¹(−D₋ξ).
    diff_backward_into(xi1, dx, &mut flux.n1);
    diff_backward_into(xi2, dx, &mut flux.n2);
    let last = xi1.len() - 1;
    for j in 0..last {
        let inv = system
            .inverse(NodeComposition::new(xi1[j], xi2[j]))
            .map_err(|e| e.at_node(j))?;
        let (n1, n2) = inv.apply(-flux.n1[j], -flux.n2[j]);
        flux.n1[j] = n1;
        flux.n2[j] = n2;
    }
    flux.n1[last] = 0.0;
    flux.n2[last] = 0.0;
    Ok(())
}

/// Per-node fluxes for `state`, with the outer slot `N_J` set to zero.
pub fn compute_fluxes(state: &MixtureState, system: &FluxSystem, grid: &Grid1D) -> Result<FluxField> {
    grid.check(&state.xi1)?;
    grid.check(&state.xi2)?;
    let mut flux = FluxField::zeros(grid);
    fluxes_into(&state.xi1, &state.xi2, system, grid.dx(), &mut flux)?;
    Ok(flux)
}

/// `base + dt · D₊N`, written into `out`.
fn advance_into(base: &[f64], flux: &[f64], dt: f64, dx: f64, scratch: &mut [f64], out: &mut [f64]) {
    diff_forward_into(flux, dx, scratch);
    for ((o, b), d) in out.iter_mut().zip(base).zip(scratch.iter()) {
        *o = b + dt * d;
    }
}

/// One step of the global-linearization scheme.
///
/// `flux` must be the flux paired with `state`; the returned flux is paired
/// with the returned state.
pub fn step_global(
    state: &MixtureState,
    flux: &FluxField,
    dt: f64,
    system: &FluxSystem,
    grid: &Grid1D,
) -> Result<(MixtureState, FluxField)> {
    grid.check(&state.xi1)?;
    grid.check(&state.xi2)?;
    grid.check(&flux.n1)?;
    grid.check(&flux.n2)?;
    let n = grid.node_count();
    let mut scratch = vec![0.0; n];
    let mut next = MixtureState::new(NodalField::zeros(n), NodalField::zeros(n), state.t + dt);
    advance_into(&state.xi1, &flux.n1, dt, grid.dx(), &mut scratch, &mut next.xi1);
    advance_into(&state.xi2, &flux.n2, dt, grid.dx(), &mut scratch, &mut next.xi2);
    let next_flux = compute_fluxes(&next, system, grid)?;
    Ok((next, next_flux))
}

/// One step of the Richardson local-linearization scheme with `k_iters` sweeps.
pub fn step_richardson(
    state: &MixtureState,
    dt: f64,
    k_iters: usize,
    system: &FluxSystem,
    grid: &Grid1D,
) -> Result<(MixtureState, FluxField)> {
    if k_iters == 0 {
        return Err(Error::Scheme("k_iters must be at least 1".into()));
    }
    grid.check(&state.xi1)?;
    grid.check(&state.xi2)?;
    let n = grid.node_count();
    let dx = grid.dx();
    let mut scratch = vec![0.0; n];
    let mut flux = FluxField::zeros(grid);
    let mut iterate = (state.xi1.to_vec(), state.xi2.to_vec());
    let mut next = (vec![0.0; n], vec![0.0; n]);
    for k in 1..=k_iters {
        fluxes_into(&iterate.0, &iterate.1, system, dx, &mut flux).map_err(|e| Error::Iteration {
            k,
            source: Box::new(e),
        })?;
        advance_into(&state.xi1, &flux.n1, dt, dx, &mut scratch, &mut next.0);
        advance_into(&state.xi2, &flux.n2, dt, dx, &mut scratch, &mut next.1);
        std::mem::swap(&mut iterate, &mut next);
    }
    let out = MixtureState::new(iterate.0.into(), iterate.1.into(), state.t + dt);
    Ok((out, flux))
}

/// Step-by-step driver for one run; [`run_simulation`] is built on it.
#[derive(Debug, Clone)]
pub struct Simulation {
    system: FluxSystem,
    grid: Grid1D,
    cfg: SchemeConfig,
    t0: f64,
    n_steps: usize,
    step: usize,
    state: MixtureState,
    flux: FluxField,
}

impl Simulation {
    pub fn new(initial: MixtureState, cfg: SchemeConfig, spec: MixtureSpec, grid: Grid1D) -> Result<Self> {
        cfg.validate()?;
        initial.validate(&grid, SIMPLEX_TOLERANCE)?;
        let t0 = initial.t;
        if !(cfg.t_end > t0) {
            return Err(Error::Scheme(format!(
                "t_end = {} must exceed the initial time {t0}",
                cfg.t_end
            )));
        }
        let n_steps = step_count(cfg.t_end - t0, cfg.dt)?;
        let system = FluxSystem::new(spec);
        let flux = compute_fluxes(&initial, &system, &grid).map_err(|e| Error::Step {
            step: 0,
            source: Box::new(e),
        })?;
        Ok(Self {
            system,
            grid,
            cfg,
            t0,
            n_steps,
            step: 0,
            state: initial,
            flux,
        })
    }

    pub fn state(&self) -> &MixtureState {
        &self.state
    }

    pub fn flux(&self) -> &FluxField {
        &self.flux
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.n_steps
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::new(self.state.clone(), self.flux.clone())
    }

    /// Advances one step. Returns `false` once the final time was reached.
    pub fn advance(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        let step = self.step + 1;
        let (mut state, flux) = match self.cfg.kind {
            SchemeKind::Global => {
                step_global(&self.state, &self.flux, self.cfg.dt, &self.system, &self.grid)
            }
            SchemeKind::Richardson => {
                step_richardson(&self.state, self.cfg.dt, self.cfg.k_iters, &self.system, &self.grid)
            }
        }
        .map_err(|e| Error::Step {
            step,
            source: Box::new(e),
        })?;
        state.t = if step == self.n_steps {
            self.cfg.t_end
        } else {
            self.t0 + step as f64 * self.cfg.dt
        };
        self.state = state;
        self.flux = flux;
        self.step = step;
        Ok(true)
    }
}

/// Runs one simulation, recording the initial state, every
/// `snapshot_stride`-th step and the final state.
pub fn run_simulation(
    initial: MixtureState,
    cfg: SchemeConfig,
    spec: MixtureSpec,
    grid: Grid1D,
) -> Result<TimeSeries> {
    let mut sim = Simulation::new(initial, cfg, spec, grid)?;
    let mut snapshots = vec![sim.snapshot()];
    while sim.advance()? {
        if sim.step_index() % cfg.snapshot_stride == 0 || sim.is_finished() {
            snapshots.push(sim.snapshot());
        }
    }
    Ok(TimeSeries::new(
        grid,
        snapshots,
        Some(RunInfo {
            spec,
            kind: cfg.kind,
            dt: cfg.dt,
            k_iters: cfg.k_iters,
        }),
    ))
}

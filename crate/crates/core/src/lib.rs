//! One-dimensional ternary Maxwell–Stefan diffusion.
//!
//! The crate integrates the reduced two-species system on a uniform grid over
//! [0, 1] with no-flux walls, using either a globally linearized explicit
//! Euler scheme or a Richardson fixed-point iteration inside each step, and
//! ships the diagnostics needed to check conservation, convergence and
//! uphill transport of the middle species.
//!
//! ```no_run
//! use msdiff::{scenarios, schemes, Grid1D};
//!
//! let grid = Grid1D::new(140)?;
//! let sc = scenarios::scenario_catalog("uphill-semidegenerate")?;
//! let dt = schemes::DtPolicy::CFL.resolve(&grid, &sc.spec, sc.t_end)?;
//! let cfg = schemes::SchemeConfig::global(dt, sc.t_end).with_stride(1000);
//! let series = schemes::run_simulation(sc.initial_state(&grid), cfg, sc.spec, grid)?;
//! # Ok::<(), msdiff::Error>(())
//! ```

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod mixture;
pub mod scenarios;
pub mod schemes;

pub use diagnostics::{
    convergence_study, l1_error, reconstruct_third, total_moles, uphill_mask, ConvergenceReport,
    Snapshot, StudyCase, TimeSeries,
};
pub use error::{Error, Result};
pub use grid::{build_grid, diff_backward, diff_forward, Grid1D, NodalField};
pub use mixture::{
    derive_coefficients, flux_system_inverse, flux_system_matrix, solve_node_fluxes, FluxMatrix2,
    FluxSystem, MixtureCoefficients, MixtureSpec, NodeComposition,
};
pub use scenarios::{initial_step, initial_uphill, scenario_catalog, InitialProfile, Scenario};
pub use schemes::{
    cfl_time_step, compute_fluxes, run_simulation, step_global, step_richardson, DtPolicy,
    FluxField, MixtureState, SchemeConfig, SchemeKind, Simulation,
};

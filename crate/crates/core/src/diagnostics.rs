//! Derived quantities and verification instruments over recorded runs.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{diff_backward, Grid1D, NodalField};
use crate::mixture::MixtureSpec;
use crate::scenarios::Scenario;
use crate::schemes::{run_simulation, DtPolicy, FluxField, MixtureState, SchemeConfig, SchemeKind};

/// Products `N₂·(D₋ξ₂)` at or below this are treated as roundoff.
pub const UPHILL_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: MixtureState,
    pub flux: FluxField,
}

impl Snapshot {
    pub fn new(state: MixtureState, flux: FluxField) -> Self {
        Self { state, flux }
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }
}

/// How a series was produced. Absent for series read back from CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunInfo {
    pub spec: MixtureSpec,
    pub kind: SchemeKind,
    pub dt: f64,
    pub k_iters: usize,
}

/// Ordered snapshots on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub grid: Grid1D,
    pub snapshots: Vec<Snapshot>,
    pub info: Option<RunInfo>,
}

impl TimeSeries {
    pub fn new(grid: Grid1D, snapshots: Vec<Snapshot>, info: Option<RunInfo>) -> Self {
        Self {
            grid,
            snapshots,
            info,
        }
    }

    /// Snapshot recorded at exactly time `t`.
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.t() == t)
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(Snapshot::t)
    }
}

/// ξ₃ = 1 − ξ₁ − ξ₂ and N₃ = −N₁ − N₂, node by node.
pub fn reconstruct_third(state: &MixtureState, flux: &FluxField) -> (NodalField, NodalField) {
    let xi3 = state
        .xi1
        .iter()
        .zip(state.xi2.iter())
        .map(|(a, b)| 1.0 - a - b)
        .collect::<Vec<_>>();
    let n3 = flux
        .n1
        .iter()
        .zip(flux.n2.iter())
        .map(|(a, b)| -a - b)
        .collect::<Vec<_>>();
    (xi3.into(), n3.into())
}

/// Discrete totals `Δx·Σⱼ ξᵢ,ⱼ` for the three species.
pub fn total_moles(state: &MixtureState, grid: &Grid1D) -> [f64; 3] {
    let dx = grid.dx();
    let m1 = dx * state.xi1.sum();
    let m2 = dx * state.xi2.sum();
    let m3 = dx * state.xi1.iter().zip(state.xi2.iter()).map(|(a, b)| 1.0 - a - b).sum::<f64>();
    [m1, m2, m3]
}

fn snapshot_distance(a: &MixtureState, b: &MixtureState, dx: f64) -> f64 {
    let s1: f64 = a.xi1.iter().zip(b.xi1.iter()).map(|(x, y)| (x - y).abs()).sum();
    let s2: f64 = a.xi2.iter().zip(b.xi2.iter()).map(|(x, y)| (x - y).abs()).sum();
    dx * (s1 + s2)
}

/// `Δx·Σⱼ (|ξ₁ᶜ − ξ₁ʳ| + |ξ₂ᶜ − ξ₂ʳ|)` at time `t`, which both series must
/// have recorded exactly.
pub fn l1_error(candidate: &TimeSeries, reference: &TimeSeries, t: f64) -> Result<f64> {
    if candidate.grid != reference.grid {
        return Err(Error::GridMismatch(
            candidate.grid.j_max(),
            reference.grid.j_max(),
        ));
    }
    let c = candidate.at(t).ok_or(Error::MissingSnapshot(t))?;
    let r = reference.at(t).ok_or(Error::MissingSnapshot(t))?;
    Ok(snapshot_distance(&c.state, &r.state, candidate.grid.dx()))
}

/// Space-time samples where species 2 is transported up its own gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct UphillMask {
    pub times: Vec<f64>,
    /// `cells[n][j]` for snapshot `n`, node `j`.
    pub cells: Vec<Vec<bool>>,
}

impl UphillMask {
    pub fn count(&self) -> usize {
        self.cells.iter().flatten().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Marked samples among snapshots with `t <= t_max`.
    pub fn count_until(&self, t_max: f64) -> usize {
        self.times
            .iter()
            .zip(&self.cells)
            .filter(|(t, _)| **t <= t_max)
            .map(|(_, row)| row.iter().filter(|&&c| c).count())
            .sum()
    }
}

/// Marks `(j, n)` where `N₂·(D₋ξ₂)ⱼ > τ` in snapshot `n`.
pub fn uphill_mask(series: &TimeSeries) -> Result<UphillMask> {
    let mut times = Vec::with_capacity(series.snapshots.len());
    let mut cells = Vec::with_capacity(series.snapshots.len());
    for snap in &series.snapshots {
        let grad = diff_backward(&snap.state.xi2, &series.grid)?;
        series.grid.check(&snap.flux.n2)?;
        cells.push(
            snap.flux
                .n2
                .iter()
                .zip(grad.iter())
                .map(|(n, g)| n * g > UPHILL_THRESHOLD)
                .collect(),
        );
        times.push(snap.t());
    }
    Ok(UphillMask { times, cells })
}

/// One configuration in a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyCase {
    pub kind: SchemeKind,
    pub dt: DtPolicy,
    pub k_iters: usize,
}

impl StudyCase {
    pub fn global(dt: DtPolicy) -> Self {
        Self {
            kind: SchemeKind::Global,
            dt,
            k_iters: 1,
        }
    }

    pub fn richardson(dt: DtPolicy, k_iters: usize) -> Self {
        Self {
            kind: SchemeKind::Richardson,
            dt,
            k_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub kind: SchemeKind,
    pub dt: f64,
    pub k_iters: usize,
    /// NaN when the run failed; see `failure`.
    pub l1_error: f64,
    pub seconds: f64,
    pub failure: Option<String>,
    /// Final state of the run, kept for further checks.
    pub final_state: Option<MixtureState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub comparison_time: f64,
    pub reference_dt: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Runs every case to the scenario's end time and measures its L1 distance
/// from a global-scheme reference run with step `reference`.
///
/// Failing cases produce a row with a failure message; only a failing
/// reference run aborts the study.
pub fn convergence_study(
    scenario: &Scenario,
    grid: &Grid1D,
    cases: &[StudyCase],
    reference: DtPolicy,
) -> Result<ConvergenceReport> {
    let t_end = scenario.t_end;
    let run = |kind: SchemeKind, dt: f64, k_iters: usize| -> Result<TimeSeries> {
        let n = crate::schemes::step_count(t_end, dt)?;
        let cfg = SchemeConfig {
            kind,
            dt,
            k_iters,
            t_end,
            snapshot_stride: n,
        };
        run_simulation(scenario.initial_state(grid), cfg, scenario.spec, *grid)
    };

    let reference_dt = reference.resolve(grid, &scenario.spec, t_end)?;
    let reference_series = run(SchemeKind::Global, reference_dt, 1)?;

    let rows = cases
        .par_iter()
        .map(|case| {
            let k_iters = match case.kind {
                SchemeKind::Global => 1,
                SchemeKind::Richardson => case.k_iters,
            };
            let started = Instant::now();
            let dt = case.dt.resolve(grid, &scenario.spec, t_end);
            let outcome = dt.as_ref().map_err(|e| e.to_string()).and_then(|&dt| {
                let series = run(case.kind, dt, k_iters).map_err(|e| e.to_string())?;
                let err = l1_error(&series, &reference_series, t_end).map_err(|e| e.to_string())?;
                Ok((err, series))
            });
            let seconds = started.elapsed().as_secs_f64();
            let dt = dt.unwrap_or(f64::NAN);
            match outcome {
                Ok((err, series)) => ConvergenceRow {
                    kind: case.kind,
                    dt,
                    k_iters,
                    l1_error: err,
                    seconds,
                    failure: None,
                    final_state: series.last().map(|s| s.state.clone()),
                },
                Err(msg) => ConvergenceRow {
                    kind: case.kind,
                    dt,
                    k_iters,
                    l1_error: f64::NAN,
                    seconds,
                    failure: Some(msg),
                    final_state: None,
                },
            }
        })
        .collect();

    Ok(ConvergenceReport {
        scenario: scenario.name.clone(),
        comparison_time: t_end,
        reference_dt,
        rows,
    })
}

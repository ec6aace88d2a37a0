//! Run configuration documents and CSV formats.
//!
//! Config documents are flat TOML with the keys `scenario, d12, d13, d23,
//! init, j_max, scheme, dt, k_iters, t_end, snapshot_stride, output`. Every
//! key is optional:
//!
//! ```toml
//! scenario = "duncan-toor-asymptotic"
//! dt = "cfl/2"          # "cfl", "cfl/<n>" or a number
//! scheme = "richardson"
//! k_iters = 4
//! ```
//!
//! Snapshot CSV rows are `t,x,xi1,xi2,xi3,n1,n2,n3`, time-major then node
//! index, every value printed with 17 significant digits so that parsing the
//! file back reproduces the run bit for bit.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use serde::Deserialize;

use crate::diagnostics::{reconstruct_third, ConvergenceReport, Snapshot, TimeSeries};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::mixture::MixtureSpec;
use crate::scenarios::{scenario_catalog, InitialProfile, Scenario, CUSTOM, UPHILL_SEMIDEGENERATE};
use crate::schemes::{step_count, DtPolicy, FluxField, MixtureState, SchemeConfig, SchemeKind};

pub const DEFAULT_J_MAX: usize = 140;
/// Upper bound on recorded snapshots when no stride is configured.
pub const MAX_DEFAULT_SNAPSHOTS: usize = 512;
pub const SNAPSHOT_HEADER: &str = "t,x,xi1,xi2,xi3,n1,n2,n3";
pub const CONVERGENCE_HEADER: &str = "scheme,dt,k_iters,l1_error,seconds";

/// Raw, unvalidated key-value document. Later layers override earlier ones
/// through [`ConfigDocument::overlay`].
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub scenario: Option<String>,
    pub d12: Option<f64>,
    pub d13: Option<f64>,
    pub d23: Option<f64>,
    pub init: Option<String>,
    pub j_max: Option<i64>,
    pub scheme: Option<String>,
    pub dt: Option<toml::Value>,
    pub k_iters: Option<i64>,
    pub t_end: Option<f64>,
    pub snapshot_stride: Option<i64>,
    pub output: Option<PathBuf>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn overlay(mut self, top: ConfigDocument) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if top.$f.is_some() { self.$f = top.$f; } )* };
        }
        take!(scenario, d12, d13, d23, init, j_max, scheme, dt, k_iters, t_end, snapshot_stride, output);
        self
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

fn positive_count(field: &str, v: Option<i64>, default: usize, min: i64) -> Result<usize> {
    match v {
        None => Ok(default),
        Some(v) if v >= min => Ok(v as usize),
        Some(v) => Err(invalid(field, format!("must be at least {min}, got {v}"))),
    }
}

/// Validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub j_max: usize,
    pub scheme: SchemeKind,
    pub dt: DtPolicy,
    pub k_iters: usize,
    pub t_end: f64,
    /// `None` picks a stride that keeps at most [`MAX_DEFAULT_SNAPSHOTS`].
    pub snapshot_stride: Option<usize>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_document(doc: &ConfigDocument) -> Result<Self> {
        let name = doc.scenario.as_deref().unwrap_or(UPHILL_SEMIDEGENERATE);
        let custom_keys = doc.d12.is_some() || doc.d13.is_some() || doc.d23.is_some() || doc.init.is_some();
        let scenario = if name == CUSTOM {
            let d = |field: &str, v: Option<f64>| {
                v.ok_or_else(|| invalid(field, "required when scenario = \"custom\""))
            };
            let spec = MixtureSpec::new(d("d12", doc.d12)?, d("d13", doc.d13)?, d("d23", doc.d23)?)?;
            let profile: InitialProfile = doc
                .init
                .as_deref()
                .ok_or_else(|| invalid("init", "required when scenario = \"custom\""))?
                .parse()?;
            Scenario::custom(spec, profile, 1.0)
        } else {
            if custom_keys {
                return Err(invalid(
                    "scenario",
                    format!("d12/d13/d23/init only apply to scenario = \"custom\", not '{name}'"),
                ));
            }
            scenario_catalog(name)?
        };

        let j_max = positive_count("j_max", doc.j_max, DEFAULT_J_MAX, 2)?;
        let scheme = match &doc.scheme {
            None => SchemeKind::Global,
            Some(s) => s.parse().map_err(|e: Error| invalid("scheme", e))?,
        };
        let dt = match &doc.dt {
            None => DtPolicy::CFL,
            Some(toml::Value::String(s)) => s.parse().map_err(|e: Error| invalid("dt", e))?,
            Some(toml::Value::Float(v)) => DtPolicy::Fixed(*v),
            Some(toml::Value::Integer(v)) => DtPolicy::Fixed(*v as f64),
            Some(other) => return Err(invalid("dt", format!("unsupported value {other}"))),
        };
        if let DtPolicy::Fixed(v) = dt {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid("dt", format!("must be positive, got {v}")));
            }
        }
        let k_iters = positive_count("k_iters", doc.k_iters, 1, 1)?;
        let t_end = doc.t_end.unwrap_or(scenario.t_end);
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(invalid("t_end", format!("must be positive, got {t_end}")));
        }
        let snapshot_stride = match doc.snapshot_stride {
            None => None,
            Some(v) => Some(positive_count("snapshot_stride", Some(v), 1, 1)?),
        };
        let scenario = Scenario { t_end, ..scenario };
        let cfg = RunConfig {
            scenario,
            j_max,
            scheme,
            dt,
            k_iters,
            t_end,
            snapshot_stride,
            output: doc.output.clone(),
        };
        // Surfaces a non-dividing fixed dt before anything runs.
        cfg.scheme_config()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Grid1D {
        Grid1D::new(self.j_max).expect("j_max validated")
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let grid = self.grid();
        let dt = self
            .dt
            .resolve(&grid, &self.scenario.spec, self.t_end)
            .map_err(|e| invalid("dt", e))?;
        let n_steps = step_count(self.t_end, dt).map_err(|e| invalid("dt", e))?;
        let stride = self
            .snapshot_stride
            .unwrap_or_else(|| n_steps.div_ceil(MAX_DEFAULT_SNAPSHOTS - 2).max(1));
        Ok(SchemeConfig {
            kind: self.scheme,
            dt,
            k_iters: self.k_iters,
            t_end: self.t_end,
            snapshot_stride: stride,
        })
    }
}

/// Parses and validates a config document, applying defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    RunConfig::from_document(&ConfigDocument::parse(text)?)
}

struct Counting<W> {
    inner: W,
    bytes: usize,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.bytes += n;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Writes every snapshot of `series`; returns the number of bytes written.
pub fn write_snapshot_csv<W: Write>(series: &TimeSeries, sink: W) -> Result<usize> {
    if series.snapshots.is_empty() {
        return Err(Error::SnapshotFormat("refusing to write an empty series".into()));
    }
    let mut out = Counting {
        inner: io::BufWriter::new(sink),
        bytes: 0,
    };
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    for snap in &series.snapshots {
        let (xi3, n3) = reconstruct_third(&snap.state, &snap.flux);
        let s = &snap.state;
        let f = &snap.flux;
        for j in 0..series.grid.node_count() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t,
                series.grid.x(j),
                s.xi1[j],
                s.xi2[j],
                xi3[j],
                f.n1[j],
                f.n2[j],
                n3[j]
            )?;
        }
    }
    out.flush()?;
    Ok(out.bytes)
}

/// Reads a snapshot CSV back into a series. The grid is inferred from the
/// node count of the first snapshot and checked against every `x` value.
pub fn read_snapshot_csv<R: BufRead>(reader: R) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != SNAPSHOT_HEADER {
        return Err(Error::SnapshotFormat(format!(
            "header is '{}', expected '{SNAPSHOT_HEADER}'",
            header.join(",")
        )));
    }

    // (t, x, xi1, xi2, n1, n2) per row, grouped by t below.
    let mut groups: Vec<(f64, Vec<[f64; 5]>)> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let mut vals = [0.0f64; 8];
        if record.len() != 8 {
            return Err(Error::SnapshotFormat(format!("line {line}: expected 8 fields")));
        }
        for (k, field) in record.iter().enumerate() {
            vals[k] = field.trim().parse().map_err(|_| {
                Error::SnapshotFormat(format!("line {line}: cannot parse '{field}'"))
            })?;
        }
        let row = [vals[1], vals[2], vals[3], vals[5], vals[6]];
        match groups.last_mut() {
            Some((t, rows)) if *t == vals[0] => rows.push(row),
            _ => groups.push((vals[0], vec![row])),
        }
    }
    let nodes = groups
        .first()
        .map(|(_, rows)| rows.len())
        .ok_or_else(|| Error::SnapshotFormat("no data rows".into()))?;
    let grid = Grid1D::new(nodes.saturating_sub(1))?;

    let mut snapshots = Vec::with_capacity(groups.len());
    for (t, rows) in groups {
        if rows.len() != nodes {
            return Err(Error::SnapshotFormat(format!(
                "snapshot at t = {t:e} has {} nodes, expected {nodes}",
                rows.len()
            )));
        }
        if let Some(prev) = snapshots.last().map(Snapshot::t) {
            if !(t > prev) {
                return Err(Error::SnapshotFormat(format!("time {t:e} is not increasing")));
            }
        }
        let mut cols: [Vec<f64>; 4] = Default::default();
        for (j, r) in rows.iter().enumerate() {
            if r[0] != grid.x(j) {
                return Err(Error::SnapshotFormat(format!(
                    "x = {} at node {j} does not match a uniform grid with J = {}",
                    r[0],
                    grid.j_max()
                )));
            }
            for c in 0..4 {
                cols[c].push(r[c + 1]);
            }
        }
        let [xi1, xi2, n1, n2] = cols;
        snapshots.push(Snapshot::new(
            MixtureState::new(xi1.into(), xi2.into(), t),
            FluxField {
                n1: n1.into(),
                n2: n2.into(),
            },
        ));
    }
    Ok(TimeSeries::new(grid, snapshots, None))
}

/// One line per study row; failed rows carry `NaN` in the error column.
pub fn write_convergence_csv<W: Write>(report: &ConvergenceReport, sink: W) -> Result<usize> {
    let mut out = Counting {
        inner: io::BufWriter::new(sink),
        bytes: 0,
    };
    writeln!(out, "{CONVERGENCE_HEADER}")?;
    for row in &report.rows {
        writeln!(
            out,
            "{},{:.16e},{},{:.16e},{:.6}",
            row.kind, row.dt, row.k_iters, row.l1_error, row.seconds
        )?;
    }
    out.flush()?;
    Ok(out.bytes)
}

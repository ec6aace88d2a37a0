//! Command-line driver.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 when a run fails.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{convergence_study, l1_error, StudyCase};
use crate::error::{Error, Result};
use crate::io::{
    read_snapshot_csv, write_convergence_csv, write_snapshot_csv, ConfigDocument, RunConfig,
};
use crate::scenarios::{scenario_catalog, SCENARIO_NAMES};
use crate::schemes::{run_simulation, DtPolicy, SchemeKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "msdiff", version, about = "1D ternary Maxwell-Stefan diffusion solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write its snapshots as CSV.
    Run(RunArgs),
    /// Compare several (scheme, dt, K) runs against a fine reference run.
    Converge(ConvergeArgs),
    /// L1 distance between two snapshot CSVs at every common time.
    Compare {
        candidate: PathBuf,
        reference: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the named scenarios.
    Scenarios,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Config document (flat TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    d12: Option<f64>,
    #[arg(long)]
    d13: Option<f64>,
    #[arg(long)]
    d23: Option<f64>,
    /// uphill-profile or step-profile (custom scenarios only).
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    j_max: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    scheme: Option<String>,
    /// cfl, cfl/<n>, or an absolute step.
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    k_iters: Option<i64>,
    #[arg(long)]
    snapshot_stride: Option<i64>,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated schemes.
    #[arg(long, default_value = "global")]
    scheme: String,
    /// Comma-separated time steps.
    #[arg(long, default_value = "cfl,cfl/2,cfl/4")]
    dt: String,
    /// Comma-separated Richardson sweep counts.
    #[arg(long, default_value = "1")]
    k_iters: String,
    /// Step of the global-scheme reference run.
    #[arg(long, default_value = "cfl/8")]
    reference: String,
}

impl ProblemArgs {
    fn document(&self) -> Result<ConfigDocument> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                ConfigDocument::parse(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => ConfigDocument::default(),
        };
        Ok(base.overlay(ConfigDocument {
            scenario: self.scenario.clone(),
            d12: self.d12,
            d13: self.d13,
            d23: self.d23,
            init: self.init.clone(),
            j_max: self.j_max,
            t_end: self.t_end,
            output: self.output.clone(),
            ..Default::default()
        }))
    }
}

fn split_list<T>(text: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(s.trim())).collect()
}

fn with_sink<F>(path: Option<&Path>, stdout: &mut dyn Write, f: F) -> Result<usize>
where
    F: FnOnce(&mut dyn Write) -> Result<usize>,
{
    match path {
        Some(p) => {
            let mut file = File::create(p)?;
            f(&mut file)
        }
        None => f(stdout),
    }
}

fn run(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let doc = args.problem.document()?.overlay(ConfigDocument {
        scheme: args.scheme.clone(),
        dt: args.dt.clone().map(toml::Value::String),
        k_iters: args.k_iters,
        snapshot_stride: args.snapshot_stride,
        ..Default::default()
    });
    let cfg = RunConfig::from_document(&doc)?;
    let grid = cfg.grid();
    let scheme = cfg.scheme_config()?;
    let _ = writeln!(
        stderr,
        "{}: J = {}, scheme = {}, dt = {:e}, K = {}, t_end = {}",
        cfg.scenario.name, cfg.j_max, scheme.kind, scheme.dt, scheme.k_iters, scheme.t_end
    );
    let series = run_simulation(cfg.scenario.initial_state(&grid), scheme, cfg.scenario.spec, grid)?;
    let bytes = with_sink(cfg.output.as_deref(), stdout, |w| write_snapshot_csv(&series, w))?;
    let _ = writeln!(stderr, "wrote {} snapshots ({bytes} bytes)", series.snapshots.len());
    Ok(())
}

fn converge(args: &ConvergeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool> {
    let cfg = RunConfig::from_document(&args.problem.document()?)?;
    let grid = cfg.grid();
    let schemes = split_list(&args.scheme, |s| s.parse::<SchemeKind>())?;
    let dts = split_list(&args.dt, |s| s.parse::<DtPolicy>())?;
    let ks = split_list(&args.k_iters, |s| {
        s.parse::<usize>()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| Error::Scheme(format!("k_iters '{s}' must be a positive integer")))
    })?;
    let reference: DtPolicy = args.reference.parse()?;

    let mut cases = Vec::new();
    for &kind in &schemes {
        for &dt in &dts {
            match kind {
                SchemeKind::Global => cases.push(StudyCase::global(dt)),
                SchemeKind::Richardson => {
                    cases.extend(ks.iter().map(|&k| StudyCase::richardson(dt, k)))
                }
            }
        }
    }
    let report = convergence_study(&cfg.scenario, &grid, &cases, reference)?;
    with_sink(cfg.output.as_deref(), stdout, |w| write_convergence_csv(&report, w))?;
    let mut ok = true;
    for row in &report.rows {
        if let Some(msg) = &row.failure {
            ok = false;
            let _ = writeln!(stderr, "{} dt = {:e} K = {}: {msg}", row.kind, row.dt, row.k_iters);
        }
    }
    Ok(ok)
}

fn compare(
    candidate: &Path,
    reference: &Path,
    output: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let open = |p: &Path| -> Result<_> {
        let file = File::open(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
        read_snapshot_csv(BufReader::new(file))
    };
    let a = open(candidate)?;
    let b = open(reference)?;
    let mut lines = Vec::new();
    for t in a.times() {
        if b.at(t).is_some() {
            lines.push(format!("{t:.16e},{:.16e}", l1_error(&a, &b, t)?));
        }
    }
    if lines.is_empty() {
        return Err(Error::SnapshotFormat("the two files share no snapshot time".into()));
    }
    with_sink(output, stdout, |w| {
        let mut n = 0;
        for line in std::iter::once("t,l1_error".to_string()).chain(lines) {
            writeln!(w, "{line}")?;
            n += line.len() + 1;
        }
        Ok(n)
    })?;
    Ok(())
}

fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        EXIT_INVALID
    } else {
        EXIT_RUNTIME
    }
}

/// Runs the CLI on `args` (including the program name). Never panics on bad
/// input.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => run(args, stdout, stderr).map(|_| true),
        Command::Converge(args) => converge(args, stdout, stderr),
        Command::Compare {
            candidate,
            reference,
            output,
        } => compare(candidate, reference, output.as_deref(), stdout).map(|_| true),
        Command::Scenarios => {
            for name in SCENARIO_NAMES {
                let sc = scenario_catalog(name).expect("catalog entry");
                let _ = writeln!(
                    stdout,
                    "{name}\td12={} d13={} d23={}\t{}\tT={}",
                    sc.spec.d12(),
                    sc.spec.d13(),
                    sc.spec.d23(),
                    sc.profile,
                    sc.t_end
                );
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_RUNTIME,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

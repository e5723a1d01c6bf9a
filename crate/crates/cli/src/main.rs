//! `risf`: secrecy metrics of surface-assisted links under F fading.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or configuration
//! error, 3 numerical failure.

// Range checks are negated so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod dist;
mod eval;
mod output;
mod sweep;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use config::{expand_modes, Axis, EveModeArg, GModeArg, Manifest, Metric, Mode, Receiver};

#[derive(Parser)]
#[command(name = "risf", version, about = "Secrecy outage and average secrecy capacity sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one metric along a grid with the chosen methods.
    Sweep(SweepArgs),
    /// Cross-check contour values, quadrature and Monte-Carlo on a fixed suite.
    Validate(ValidateArgs),
    /// Dump the analytic and empirical SNR distribution of one receiver.
    Dist(DistArgs),
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; unspecified keys take the reference defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Monte-Carlo trials per point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Number of reflecting elements.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, value_enum)]
    eve_mode: Option<EveModeArg>,
    #[arg(long, value_enum)]
    g_mode: Option<GModeArg>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    from_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to_db: Option<f64>,
    #[arg(long)]
    step_db: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum)]
    metric: Option<Metric>,
    /// Comma-separated evaluation methods.
    #[arg(long, value_enum, value_delimiter = ',')]
    mode: Option<Vec<Mode>>,
    #[arg(long, value_enum)]
    axis: Option<Axis>,
    /// Also write a matplotlib script that plots the CSV (needs --out).
    #[arg(long, value_name = "PATH")]
    plot_script: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Relative tolerance of contour values against quadrature, for both
    /// metrics.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum)]
    receiver: Option<Receiver>,
}

enum Failure {
    Usage(anyhow::Error),
    Validation(String),
    Numeric(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

fn usage<T>(r: Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn numeric<T>(r: Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Numeric)
}

fn resolve(common: &Common) -> Result<Manifest> {
    let mut m = match &common.config {
        Some(p) => Manifest::load(p)?,
        None => Manifest::default(),
    };
    if let Some(t) = common.trials {
        m.mc.trials = t;
    }
    if let Some(s) = common.seed {
        m.mc.seed = s;
    }
    if let Some(n) = common.n {
        m.scenario.n_elements = n;
    }
    if let Some(e) = common.eve_mode {
        m.mc.eve_mode = e;
    }
    if let Some(g) = common.g_mode {
        m.mc.g_mode = g;
    }
    Ok(m)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let mut m = usage(resolve(&args.common))?;
    let s = &mut m.sweep;
    s.from_db = args.grid.from_db.unwrap_or(s.from_db);
    s.to_db = args.grid.to_db.unwrap_or(s.to_db);
    s.step_db = args.grid.step_db.unwrap_or(s.step_db);
    s.metric = args.metric.unwrap_or(s.metric);
    s.axis = args.axis.unwrap_or(s.axis);
    if let Some(modes) = &args.mode {
        s.modes = modes.clone();
    }
    usage((|| {
        if expand_modes(&m.sweep.modes).is_empty() {
            bail!("no evaluation modes requested");
        }
        if let Some(s) = m.sweep.series.as_ref().filter(|s| s.values.is_empty()) {
            bail!("series `{}` has no values", s.parameter.name());
        }
        if args.plot_script.is_some() && args.common.out.is_none() {
            bail!("--plot-script needs --out so the script knows which file to read");
        }
        m.grid()?;
        m.scenario()?;
        Ok(())
    })())?;
    let mut out = usage(output::open(args.common.out.as_deref()))?;
    let summary = numeric(sweep::run(&m, &mut out))?;
    numeric(out.flush().map_err(Into::into))?;
    if let (Some(script), Some(csv)) = (&args.plot_script, &args.common.out) {
        let log_y = m.sweep.metric == Metric::Sop;
        usage(output::write_plot_script(script, csv, log_y))?;
    }
    if summary.failures > 0 {
        return Err(Failure::Numeric(anyhow::anyhow!(
            "{} of {} rows failed; see the note column",
            summary.failures,
            summary.rows
        )));
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let mut m = usage(resolve(&args.common))?;
    if let Some(t) = args.tolerance {
        if !(t >= 0.0) {
            return Err(Failure::Usage(anyhow::anyhow!("tolerance must be nonnegative, got {t}")));
        }
        m.tolerance.sop_rel = t;
        m.tolerance.asc_rel = t;
    }
    usage(m.scenario().map(|_| ()))?;
    let mut out = usage(output::open(args.common.out.as_deref()))?;
    let summary = numeric(validate::run(&m, &validate::default_suite(), &mut out))?;
    numeric(out.flush().map_err(Into::into))?;
    drop(out);
    if args.common.out.is_some() {
        print!("{}", summary.table);
    } else {
        eprint!("{}", summary.table);
    }
    if summary.failed > 0 {
        return Err(Failure::Validation(format!(
            "{} of {} points failed",
            summary.failed, summary.points
        )));
    }
    Ok(())
}

fn cmd_dist(args: &DistArgs) -> Result<(), Failure> {
    let mut m = usage(resolve(&args.common))?;
    let d = &mut m.dist;
    d.from_db = args.grid.from_db.unwrap_or(d.from_db);
    d.to_db = args.grid.to_db.unwrap_or(d.to_db);
    d.step_db = args.grid.step_db.unwrap_or(d.step_db);
    d.receiver = args.receiver.unwrap_or(d.receiver);
    usage((|| {
        m.dist_grid()?;
        m.scenario()?;
        if !(m.dist.confidence > 0.0 && m.dist.confidence < 1.0) {
            bail!("DKW confidence must lie in (0, 1)");
        }
        Ok(())
    })())?;
    let mut out = usage(output::open(args.common.out.as_deref()))?;
    let summary = numeric(dist::run(&m, &mut out))?;
    numeric(out.flush().map_err(Into::into))?;
    if summary.outside_band > 0 {
        eprintln!(
            "note: analytic CDF outside the DKW band at {} of {} grid points",
            summary.outside_band, summary.rows
        );
    }
    Ok(())
}

fn report(path: Option<&Path>) {
    if let Some(p) = path {
        eprintln!("wrote {}", p.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, out) = match &cli.command {
        Command::Sweep(a) => (cmd_sweep(a), a.common.out.as_deref()),
        Command::Validate(a) => (cmd_validate(a), a.common.out.as_deref()),
        Command::Dist(a) => (cmd_dist(a), a.common.out.as_deref()),
    };
    match result {
        Ok(()) => {
            report(out);
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::Usage(e) | Failure::Numeric(e) => eprintln!("error: {e:#}"),
                Failure::Validation(msg) => eprintln!("validation failed: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

//! `ceo` subcommands.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{exit, Result, SimError};
use crate::harness::{
    run_bound_comparison, run_distortion_sweep, run_equivalence_study, run_scaling_study, BetaEstimate,
    BoundComparison,
};
use crate::io::{self, DistortionRow, RunOutput};
use crate::presets;
use crate::verify::{run_suite, Scale};

pub const DEFAULT_OUT: &str = "ceo-out";
pub const DEFAULT_GAP_MAX: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "ceo", version, about = "CEO problem simulations and distortion bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: the config's `[output] dir`, else `ceo-out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for Monte-Carlo trials.
    #[arg(long, global = true, env = "CEO_THREADS")]
    pub threads: Option<usize>,
    /// Print rates in bits instead of nats. Files always hold nats.
    #[arg(long, global = true)]
    pub bits: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distortion at every L of the grid.
    Simulate(ConfigArgs),
    /// Bound table for the configured model and channel sweep.
    Bounds {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also estimate β by simulation at every sweep point.
        #[arg(long)]
        simulate: bool,
    },
    /// Slope and β estimates over the L grid.
    Scaling(ConfigArgs),
    /// Quadratic versus logarithmic distortion for the Gaussian posterior.
    Equivalence(ConfigArgs),
    /// Built-in oracle checks.
    Verify {
        /// Smaller Monte-Carlo budgets.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// One of the shipped configurations.
    #[arg(long)]
    pub preset: Option<String>,
}

/// Global options shared by the subcommands.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub bits: bool,
}

impl Context {
    fn load(&self, args: &ConfigArgs) -> Result<ExperimentConfig> {
        let mut cfg = match (&args.config, &args.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => presets::load(name)?,
            (None, None) => return Err(SimError::config("pass --config PATH or --preset NAME")),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn rate(&self, nats: f64) -> (f64, &'static str) {
        if self.bits {
            (nats / std::f64::consts::LN_2, "bits")
        } else {
            (nats, "nats")
        }
    }
}

pub fn simulate(ctx: &Context, args: &ConfigArgs, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let cfg = ctx.load(args)?;
    let rows: Vec<DistortionRow> = run_distortion_sweep(&cfg)?
        .iter()
        .map(|p| DistortionRow::new(p, cfg.r, cfg.rule, cfg.seed))
        .collect();
    let mut out = RunOutput::create(&ctx.out_dir(&cfg), "simulate", &cfg)?;
    out.csv("distortion.csv", &rows)?;
    out.finish()?;
    for row in &rows {
        let (rate, unit) = ctx.rate(row.r_sum_nats);
        let _ = writeln!(stdout, "L={:<6} R_sum={rate:.4} {unit}  D_hat={:.6e}  [{:.6e}, {:.6e}]", row.agents, row.d_hat, row.ci_lo, row.ci_hi);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScalingSummary<'a> {
    schema: &'static str,
    config_hash: &'a str,
    r: f64,
    exponent: f64,
    slope: f64,
    intercept: f64,
    slope_stderr: f64,
    beta: BetaEstimate,
}

pub fn scaling(ctx: &Context, args: &ConfigArgs, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let cfg = ctx.load(args)?;
    let result = run_scaling_study(&cfg)?;
    let rows: Vec<DistortionRow> =
        result.rows.iter().map(|p| DistortionRow::new(p, cfg.r, cfg.rule, cfg.seed)).collect();
    let mut out = RunOutput::create(&ctx.out_dir(&cfg), "scaling", &cfg)?;
    out.csv("scaling.csv", &rows)?;
    out.json(
        "scaling.json",
        &ScalingSummary {
            schema: io::SCALING_SCHEMA,
            config_hash: &cfg.hash,
            r: result.r,
            exponent: result.exponent,
            slope: result.fit.slope,
            intercept: result.fit.intercept,
            slope_stderr: result.fit.stderr,
            beta: result.beta,
        },
    )?;
    out.finish()?;
    let _ = writeln!(
        stdout,
        "slope = {:.4} ± {:.4}  beta_hat = {:.4} [{:.4}, {:.4}] over the top {} rows",
        result.fit.slope, result.fit.stderr, result.beta.mean, result.beta.lo, result.beta.hi, result.beta.rows_used
    );
    let acc = &cfg.acceptance;
    if let (Some(target), Some(tol)) = (acc.slope, acc.slope_tol) {
        if (result.fit.slope - target).abs() > tol {
            return Err(SimError::Threshold(format!("slope {:.4} outside {target} ± {tol}", result.fit.slope)));
        }
    }
    let lo = acc.beta_lo.unwrap_or(f64::NEG_INFINITY);
    let hi = acc.beta_hi.unwrap_or(f64::INFINITY);
    if !(lo..=hi).contains(&result.beta.mean) {
        return Err(SimError::Threshold(format!("beta_hat {:.4} outside [{lo}, {hi}]", result.beta.mean)));
    }
    Ok(())
}

pub fn equivalence(ctx: &Context, args: &ConfigArgs, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let cfg = ctx.load(args)?;
    let rows = run_equivalence_study(&cfg)?;
    let mut out = RunOutput::create(&ctx.out_dir(&cfg), "equivalence", &cfg)?;
    out.csv("equivalence.csv", &rows)?;
    out.finish()?;
    let gap_max = cfg.acceptance.gap_max.unwrap_or(DEFAULT_GAP_MAX);
    for row in &rows {
        let _ = writeln!(stdout, "L={:<6} D_Q={:.6e}  D_Log={:.6}  gap={:.3e}", row.agents, row.d_q, row.d_log, row.gap);
    }
    if let Some(bad) = rows.iter().find(|r| r.gap.abs() >= gap_max || !r.epi_holds) {
        return Err(SimError::Threshold(format!("equivalence gap {:.3e} at L = {} (limit {gap_max:e})", bad.gap, bad.agents)));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct BoundsFile<'a> {
    schema: &'static str,
    config_hash: &'a str,
    #[serde(flatten)]
    table: &'a BoundComparison,
}

pub fn bounds(ctx: &Context, args: &ConfigArgs, simulate: bool, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let cfg = ctx.load(args)?;
    let table = run_bound_comparison(&cfg, simulate);
    let mut out = RunOutput::create(&ctx.out_dir(&cfg), "bounds", &cfg)?;
    let path = out.json("bounds.json", &BoundsFile { schema: io::BOUNDS_SCHEMA, config_hash: &cfg.hash, table: &table })?;
    out.finish()?;
    let _ = writeln!(stdout, "wrote {}", path.display());
    for row in &table.sweep {
        let show = |b: &Option<crate::harness::BoundEntry>| b.as_ref().map_or(f64::NAN, |b| b.value);
        let (mi, unit) = ctx.rate(row.mi);
        let _ = writeln!(
            stdout,
            "channel={:?}  I={mi:.4e} {unit}  converse={:.5}  achievability={:.5}",
            row.channel_param,
            show(&row.converse),
            show(&row.achievability)
        );
    }
    match table.errors.first() {
        Some(first) => Err(SimError::Numerical(format!("{} bound(s) failed, first: {first}", table.errors.len()))),
        None => Ok(()),
    }
}

pub fn verify(quick: bool, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let checks = run_suite(if quick { Scale::QUICK } else { Scale::FULL });
    for c in &checks {
        let _ = writeln!(stdout, "{}", c.line());
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(SimError::Numerical(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn dispatch(cli: &Cli, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let ctx = Context { seed: cli.seed, out: cli.out.clone(), bits: cli.bits };
    match &cli.command {
        Command::Simulate(a) => simulate(&ctx, a, stdout),
        Command::Bounds { config, simulate } => bounds(&ctx, config, *simulate, stdout),
        Command::Scaling(a) => scaling(&ctx, a, stdout),
        Command::Equivalence(a) => equivalence(&ctx, a, stdout),
        Command::Verify { quick } => verify(*quick, stdout),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> u8 {
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(SimError::from)
            .and_then(|pool| pool.install(|| dispatch(cli, stdout))),
        None => dispatch(cli, stdout),
    };
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

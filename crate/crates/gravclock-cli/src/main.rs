//! `gravclock` — deterministic tables and reports for a pair of
//! gravitationally coupled quantum clocks.
//!
//! Subcommands regenerate the figure datasets (`prob-sweep`, `qfi-sweep`,
//! `entangle`), run Monte Carlo estimation experiments (`estimate`), or
//! evaluate a single protocol point (`prob`). All parameters come from an
//! optional JSON config file; every command has a documented default so the
//! tool is usable bare. Identical inputs produce byte-identical outputs.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use gravclock::model::ClockParams;
use gravclock::protocol::{bob_probability, compare_modes, DualOutcome, ModeComparison, Window};
use gravclock::provenance;
use gravclock::sweep::{
    default_entanglement_figure, default_probability_figure, default_qfi_figure,
    run_entanglement_sweep, run_estimation_experiment, run_probability_sweep, run_qfi_sweep,
    ExperimentConfig, SweepKind, SweepSpec, SweepTable,
};
use gravclock::units::{to_dimensionless, PhysicalConstants, SiClockParams};

#[derive(Parser)]
#[command(
    name = "gravclock",
    version,
    about = "Simulator and estimation toolkit for two gravitationally coupled quantum clocks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measurement-probability sweep (defaults to the probability figure).
    ProbSweep(CommonArgs),
    /// Fisher-information sweep (defaults to the QFI figure).
    QfiSweep(QfiArgs),
    /// Entanglement sweep of the evolving joint state.
    Entangle(CommonArgs),
    /// Monte Carlo maximum-likelihood estimation experiment.
    Estimate(CommonArgs),
    /// Single-point outcome probabilities with a conditioning-mode
    /// comparison.
    Prob(ProbArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; omit to use built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (sweeps default to csv, reports to json).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed override recorded in output metadata; for `estimate` it replaces
    /// the configured base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct QfiArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Finite-difference step override for the numerical QFI.
    #[arg(long)]
    qfi_step: Option<f64>,
}

#[derive(Args)]
struct ProbArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Measurement offset δ_p; falls back to the config estimate section.
    #[arg(long)]
    delta_p: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Top-level config file schema. Sections are independent: `params` (or its
/// SI equivalent) feeds `prob` and `estimate`; `sweep` feeds the sweep
/// subcommands.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    /// SI constants override for converting `si_params`.
    constants: Option<PhysicalConstants>,
    params: Option<ClockParams>,
    si_params: Option<SiClockParams>,
    sweep: Option<SweepSpec>,
    estimate: Option<EstimateSection>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateSection {
    delta_p: f64,
    n: u64,
    replicates: u64,
    #[serde(default)]
    base_seed: u64,
    #[serde(default)]
    window: Option<Window>,
    #[serde(default)]
    grid_points: Option<usize>,
}

/// Single-point report emitted by `prob`.
#[derive(Serialize)]
struct ProbReport {
    tool_version: String,
    config_hash: String,
    params: ClockParams,
    delta_p: f64,
    p_plus: f64,
    p_minus: f64,
    modes: ModeComparison,
}

enum CliError {
    Config(String),
    Io(std::io::Error),
    Lib(gravclock::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<gravclock::Error> for CliError {
    fn from(e: gravclock::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Clap prints its own message; fold usage errors into the
            // configuration exit code.
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ProbSweep(args) => {
            let cfg = load_config(&args)?;
            let spec = sweep_spec(&cfg, SweepKind::Probability, default_probability_figure)?;
            let mut table = run_probability_sweep(&spec)?;
            emit_table(&args, &mut table)
        }
        Command::QfiSweep(qfi) => {
            let args = qfi.common;
            let cfg = load_config(&args)?;
            let mut spec = sweep_spec(&cfg, SweepKind::Qfi, default_qfi_figure)?;
            if let Some(step) = qfi.qfi_step {
                spec.qfi_step = Some(step);
            }
            let mut table = run_qfi_sweep(&spec)?;
            emit_table(&args, &mut table)
        }
        Command::Entangle(args) => {
            let cfg = load_config(&args)?;
            let spec = sweep_spec(&cfg, SweepKind::Entanglement, default_entanglement_figure)?;
            let mut table = run_entanglement_sweep(&spec)?;
            emit_table(&args, &mut table)
        }
        Command::Estimate(args) => {
            let cfg = load_config(&args)?;
            let params = resolve_params(&cfg)?;
            let section = cfg.estimate.clone().ok_or_else(|| {
                CliError::Config("estimate requires an `estimate` config section".into())
            })?;
            let experiment = ExperimentConfig {
                params,
                delta_p: section.delta_p,
                n: section.n,
                replicates: section.replicates,
                base_seed: args.seed.unwrap_or(section.base_seed),
                window: section.window,
                grid_points: section.grid_points,
            };
            let report = run_estimation_experiment(&experiment)?;
            match args.format.unwrap_or(Format::Json) {
                Format::Json => {
                    emit(&args, serde_json::to_string_pretty(&report).expect("serializable"))
                }
                Format::Csv => {
                    let mut out = String::new();
                    out.push_str(&format!("# tool_version: {}\n", report.meta.tool_version));
                    out.push_str(&format!("# config_hash: {}\n", report.meta.config_hash));
                    out.push_str(&format!("# seed: {}\n", report.meta.seed));
                    out.push_str("replicate,seed,k_plus,delta_hat,log_likelihood\n");
                    for r in &report.replicates {
                        out.push_str(&format!(
                            "{},{},{},{},{}\n",
                            r.replicate, r.seed, r.k_plus, r.delta_hat, r.log_likelihood
                        ));
                    }
                    emit(&args, out)
                }
            }
        }
        Command::Prob(prob) => {
            let args = prob.common;
            let cfg = load_config(&args)?;
            let params = resolve_params(&cfg)?;
            let delta_p = prob
                .delta_p
                .or_else(|| cfg.estimate.as_ref().map(|e| e.delta_p))
                .ok_or_else(|| {
                    CliError::Config(
                        "prob needs --delta-p or an `estimate` config section".into(),
                    )
                })?;
            let report = ProbReport {
                tool_version: provenance::TOOL_VERSION.to_string(),
                config_hash: provenance::config_digest(&(&params, delta_p)),
                params,
                delta_p,
                p_plus: bob_probability(&params, delta_p, DualOutcome::Plus),
                p_minus: bob_probability(&params, delta_p, DualOutcome::Minus),
                modes: compare_modes(&params, delta_p)?,
            };
            match args.format.unwrap_or(Format::Json) {
                Format::Json => {
                    emit(&args, serde_json::to_string_pretty(&report).expect("serializable"))
                }
                Format::Csv => {
                    let mut out = String::new();
                    out.push_str(&format!("# tool_version: {}\n", report.tool_version));
                    out.push_str(&format!("# config_hash: {}\n", report.config_hash));
                    out.push_str("# seed: 0\n");
                    out.push_str("epsilon1,epsilon2,xi,delta_p,p_plus,p_minus\n");
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        params.eps1, params.eps2, params.xi, delta_p, report.p_plus, report.p_minus
                    ));
                    emit(&args, out)
                }
            }
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<FileConfig, CliError> {
    let Some(path) = &args.config else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

/// The sweep spec from the config, or the subcommand's default; the config's
/// kind must match the subcommand.
fn sweep_spec(
    cfg: &FileConfig,
    kind: SweepKind,
    default: fn() -> SweepSpec,
) -> Result<SweepSpec, CliError> {
    match &cfg.sweep {
        None => Ok(default()),
        Some(spec) if spec.kind == kind => Ok(spec.clone()),
        Some(spec) => Err(CliError::Config(format!(
            "config sweep kind {:?} does not match this subcommand",
            spec.kind
        ))),
    }
}

fn resolve_params(cfg: &FileConfig) -> Result<ClockParams, CliError> {
    match (&cfg.params, &cfg.si_params) {
        (Some(p), None) => Ok(*p),
        (None, Some(si)) => {
            let constants = cfg.constants.unwrap_or_default();
            Ok(to_dimensionless(si, &constants)?)
        }
        (Some(_), Some(_)) => Err(CliError::Config(
            "config sets both `params` and `si_params`; use exactly one".into(),
        )),
        (None, None) => Err(CliError::Config(
            "config must set `params` or `si_params` for this subcommand".into(),
        )),
    }
}

fn emit_table(args: &CommonArgs, table: &mut SweepTable) -> Result<(), CliError> {
    table.meta.seed = args.seed.unwrap_or(table.meta.seed);
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut bytes = Vec::new();
            table.write_csv(&mut bytes)?;
            emit_bytes(args, &bytes)
        }
        Format::Json => emit(
            args,
            serde_json::to_string_pretty(&table.to_json()).expect("serializable"),
        ),
    }
}

fn emit(args: &CommonArgs, mut text: String) -> Result<(), CliError> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    emit_bytes(args, text.as_bytes())
}

fn emit_bytes(args: &CommonArgs, bytes: &[u8]) -> Result<(), CliError> {
    match &args.out {
        Some(path) => fs::write(path, bytes)?,
        None => {
            // A closed pipe (e.g. `gravclock prob-sweep | head`) is not an error.
            if let Err(e) = std::io::stdout().write_all(bytes) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

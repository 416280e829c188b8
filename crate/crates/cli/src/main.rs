//! `ddrab`: run antiblockade scenarios from a config file or preset and
//! write CSV, metadata and plot-script artifacts.

mod config;
mod output;
mod verbs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ddrab::model::{Preset, PRESET_NAMES};
use sha2::{Digest, Sha256};

use config::{preset_toml, RunConfig};
use output::{write_all, RunInfo};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "RAB_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Numerical(String),
    /// Exit 1.
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical invariant violated: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ddrab::Error> for CliError {
    fn from(e: ddrab::Error) -> Self {
        use ddrab::Error as E;
        match e {
            E::Physicality { .. }
            | E::NotConverged(_)
            | E::DegenerateSteadyState(_)
            | E::NotHermitian(_)
            | E::TraceNotUnit(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ddrab",
    version,
    about = "Two-atom Rydberg antiblockade simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Population transfer from |11> over one effective cycle.
    Dynamics(RunArgs),
    /// One controlled-phase gate.
    Gate(RunArgs),
    /// Gate fidelity over a deviation or Rabi-frequency axis.
    Scan(RunArgs),
    /// Geometric controlled-phase gates over a set of phases.
    Geometric(RunArgs),
    /// Dissipative steady-state singlet preparation.
    Steady(RunArgs),
    /// Generated vs closed-form effective Hamiltonian.
    EffectiveCheck(RunArgs),
    /// Crossover distance against the Forster defect.
    Crossover(RunArgs),
    /// Embedded parameter presets.
    Preset {
        #[command(subcommand)]
        cmd: PresetCmd,
    },
}

#[derive(Subcommand)]
enum PresetCmd {
    List,
    /// Print a preset in config syntax.
    Show {
        name: String,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Preset name; overrides `preset` in the config.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory [default: config `out_dir`, then $RAB_OUT_DIR, then `out`].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write a matplotlib script for the CSV.
    #[arg(long)]
    plot: bool,
}

fn run_id(verb: &str, inputs: &serde_json::Value) -> String {
    let mut h = Sha256::new();
    h.update(verb.as_bytes());
    h.update(b"\n");
    h.update(inputs.to_string().as_bytes());
    h.finalize()[..6]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn run(verb: &str, args: &RunArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &args.preset {
        cfg.preset = Some(p.clone());
    }
    if let Some(n) = args.workers.or(cfg.workers) {
        if n == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    log::info!("running {verb}");
    let outcome = match verb {
        "dynamics" => verbs::dynamics(&cfg),
        "gate" => verbs::gate(&cfg),
        "scan" => verbs::scan(&cfg),
        "geometric" => verbs::geometric(&cfg),
        "steady" => verbs::steady(&cfg),
        "effective-check" => verbs::effective_check(&cfg),
        "crossover" => verbs::crossover(&cfg),
        _ => unreachable!(),
    }?;

    let id = run_id(verb, &outcome.inputs);
    let info = RunInfo {
        verb,
        run_id: &id,
        config: outcome.inputs.clone(),
    };
    let written = write_all(&out_dir, &info, &outcome.table, args.plot)?;
    for (k, v) in &outcome.table.summary {
        if !v.is_object() {
            println!("{k}: {v}");
        }
    }
    println!("csv: {}", written.csv.display());
    println!("metadata: {}", written.sidecar.display());
    if let Some(p) = written.plot {
        println!("plot script: {}", p.display());
    }
    match outcome.violation {
        Some(v) => Err(CliError::Numerical(v)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Dynamics(a) => run("dynamics", a),
        Cmd::Gate(a) => run("gate", a),
        Cmd::Scan(a) => run("scan", a),
        Cmd::Geometric(a) => run("geometric", a),
        Cmd::Steady(a) => run("steady", a),
        Cmd::EffectiveCheck(a) => run("effective-check", a),
        Cmd::Crossover(a) => run("crossover", a),
        Cmd::Preset { cmd } => match cmd {
            PresetCmd::List => {
                for n in PRESET_NAMES {
                    println!("{n}");
                }
                Ok(())
            }
            PresetCmd::Show { name } => Preset::named(name)
                .map(|p| print!("{}", preset_toml(&p)))
                .map_err(CliError::from),
        },
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ddrab: {e}");
            ExitCode::from(e.code())
        }
    }
}

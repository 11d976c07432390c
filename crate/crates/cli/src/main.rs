use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dicke_core::sweep::{
    parse_config, run_oracle_compare, run_sweep, write_oracle_csv, write_sweep_csv, Execution, SweepConfig,
};
use dicke_core::{validate_regime, validation, Error};

#[derive(Parser, Debug)]
#[command(name = "dicke", version, about = "Ground state, fluctuations and back-action diffusion of the cavity-BEC Dicke model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the pump strength as described by a JSON config
    Sweep(Common),
    /// Order parameters and incoherent populations, δ_C = −100, u = −0.1
    Fig1(Common),
    /// Diffusion rates, δ_C = −100, u = −0.1
    Fig2(Common),
    /// Compare mean-field results with finite-N exact diagonalization
    Oracle(Common),
    /// Run the invariant suite
    Validate,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file
    #[arg(short = 'c', long = "config")]
    config: Option<PathBuf>,
    /// CSV destination (default: the config's `output`, else stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Cavity decay rate κ in units of ω_R
    #[arg(long)]
    kappa: Option<f64>,
    /// Coarse-graining window δt in units of 1/ω_R
    #[arg(long)]
    dt: Option<f64>,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn load(path: Option<&Path>) -> Result<SweepConfig, Failure> {
    let path = path.ok_or_else(|| Failure::Input("this subcommand needs -c/--config".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}

fn configure(args: &Common, preset: Option<SweepConfig>) -> Result<SweepConfig, Failure> {
    let mut cfg = match preset {
        Some(_) if args.config.is_some() => {
            return Err(Failure::Input("presets take no -c/--config".into()))
        }
        Some(p) => p,
        None => load(args.config.as_deref())?,
    };
    if let Some(k) = args.kappa {
        cfg = cfg.with_kappa(k)?;
    }
    if let Some(dt) = args.dt {
        cfg = cfg.with_coarse_grain(dt)?;
    }
    if let Some(out) = &args.output {
        cfg.output = Some(out.clone());
    }
    for w in validate_regime(&cfg.params) {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

/// Opens the destination before any computation so an unwritable path fails
/// fast.
fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
    }
}

fn write_failure(e: Error) -> Failure {
    match e {
        Error::Resource(msg) => Failure::Input(msg),
        other => other.into(),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let exec = Execution::default();
    match cli.command {
        Command::Sweep(args) => sweep(&configure(&args, None)?, exec),
        Command::Fig1(args) | Command::Fig2(args) => {
            sweep(&configure(&args, Some(SweepConfig::figure_preset()))?, exec)
        }
        Command::Oracle(args) => {
            let cfg = configure(&args, None)?;
            if cfg.oracle.is_none() {
                return Err(Failure::Input("config has no oracle block".into()));
            }
            let out = open_output(cfg.output.as_deref())?;
            let rows = run_oracle_compare(&cfg, exec)?;
            write_oracle_csv(&rows, out).map_err(write_failure)
        }
        Command::Validate => {
            let checks = validation::run_all();
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                println!("{c}");
            }
            println!("{} checks, {failed} failed", checks.len());
            if failed > 0 {
                Err(Failure::Numerical(format!("{failed} invariant checks failed")))
            } else {
                Ok(())
            }
        }
    }
}

fn sweep(cfg: &SweepConfig, exec: Execution) -> Result<(), Failure> {
    let out = open_output(cfg.output.as_deref())?;
    let rows = run_sweep(cfg, exec)?;
    write_sweep_csv(&rows, out).map_err(write_failure)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

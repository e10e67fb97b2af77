//! `delwave` — travelling-wave solvers and checks for the delayed bistable
//! reaction-diffusion model, driven by an INI config file.

mod commands;
mod config;
mod summary;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{run_command, CliError, Context};
use config::Config;
use delwave_core::nonlinearity::ResponseFunction;

#[derive(Parser)]
#[command(
    name = "delwave",
    about = "Monotone bistable travelling waves of a delayed reaction-diffusion equation",
    version
)]
struct Cli {
    /// Path to an INI config file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Delay override: the run delay for `wave`, `spectrum` and `simulate`
    /// (default 0), the sweep end for `sweep`.
    #[arg(long, global = true)]
    tau: Option<f64>,

    /// Response-family preset (A, B or C), overriding the `[function]`
    /// section.
    #[arg(long, global = true)]
    family: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the admissibility conditions of the response function.
    Validate,
    /// Solve the non-delayed wave by shooting and report envelope bounds.
    Wave0,
    /// Solve the delayed profile problem at a fixed delay.
    Wave,
    /// Continue the wave family in the delay.
    Sweep,
    /// Sample the essential-spectrum curves at the solved wave.
    Spectrum,
    /// Direct simulation with delay history and front tracking.
    Simulate,
    /// Run the bundled verification suite.
    Check,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Wave0 => "wave0",
            Command::Wave => "wave",
            Command::Sweep => "sweep",
            Command::Spectrum => "spectrum",
            Command::Simulate => "simulate",
            Command::Check => "check",
        }
    }
}

fn build_context(cli: &Cli) -> Result<Context, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            Config::parse(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => Config::default(),
    };
    if let Some(name) = &cli.family {
        let preset = ResponseFunction::preset(name)
            .ok_or_else(|| CliError::Config(format!("unknown family `{name}` (use A, B or C)")))?;
        let (kappa, a, b) = preset.parameters();
        cfg.kappa = kappa;
        cfg.a = a;
        cfg.b = b;
    }
    Ok(Context {
        cfg,
        out_dir: cli.out_dir.clone(),
        tau_override: cli.tau,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = match build_context(&cli) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run_command(cli.command.name(), &ctx) {
        Ok(summary) => {
            print!("{}", summary.to_text());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

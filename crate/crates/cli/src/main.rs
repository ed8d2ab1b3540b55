use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use squeezeline_cli::commands::{self, Couplings, Overrides, TargetChoice};
use squeezeline_cli::config::{Format, RunConfig};
use squeezeline_cli::CliError;

/// Squeezing limits of curved quantum waveguides.
#[derive(Debug, Parser)]
#[command(name = "squeezeline", version)]
struct Cli {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Rescale the profile to this bending angle.
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CouplingArgs {
    #[arg(long, allow_hyphen_values = true, requires_all = ["c2", "lambda_hat"])]
    c1: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["c1", "lambda_hat"])]
    c2: Option<f64>,
    /// Coupling strength; `inf` selects the Dirichlet decoupling.
    #[arg(long, allow_hyphen_values = true, requires_all = ["c1", "c2"])]
    lambda_hat: Option<f64>,
}

impl CouplingArgs {
    fn get(&self) -> Option<Couplings> {
        Some(Couplings {
            c1: self.c1?,
            c2: self.c2?,
            lambda_hat: self.lambda_hat?,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the profile and compute the vertex constants.
    Constants,
    /// Locate resonant parameter values along the configured scan.
    Scan,
    /// Scattering amplitudes of the limiting point interaction.
    Scatter {
        #[command(flatten)]
        couplings: CouplingArgs,
        #[arg(long, value_delimiter = ',')]
        k_grid: Option<Vec<f64>>,
    },
    /// Negative eigenvalue of the limiting point interaction, if any.
    Spectrum {
        #[command(flatten)]
        couplings: CouplingArgs,
    },
    /// Small-eps expansion of the scaled resolvent at the configured momentum.
    Probe,
    /// Sup-norm distance to the limiting resolvent along an eps list.
    Converge {
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        k_re: Option<f64>,
        #[arg(long)]
        k_im: Option<f64>,
        #[arg(long, value_enum, default_value = "auto")]
        target: TargetChoice,
    },
    /// Full run: scan, constants, scattering, spectrum and convergence.
    Pipeline,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    RunConfig::load(path)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    let config = match &cli.config {
        Some(p) => Some(RunConfig::load(p)?),
        None => None,
    };
    let format = cli
        .format
        .or(config.as_ref().map(|c| c.output.format))
        .unwrap_or_default();
    match &cli.command {
        Command::Constants => {
            commands::cmd_constants(&load(cli)?, cli.theta, out, format)?;
        }
        Command::Scan => {
            commands::cmd_scan(&load(cli)?, out, format)?;
        }
        Command::Scatter { couplings, k_grid } => {
            commands::cmd_scatter(couplings.get(), config.as_ref(), cli.theta, k_grid.clone(), out, format)?;
        }
        Command::Spectrum { couplings } => {
            commands::cmd_spectrum(couplings.get(), config.as_ref(), cli.theta, out)?;
        }
        Command::Probe => {
            commands::cmd_probe(&load(cli)?, cli.theta, out, format)?;
        }
        Command::Converge {
            eps_list,
            k_re,
            k_im,
            target,
        } => {
            let overrides = Overrides {
                theta: cli.theta,
                eps_list: eps_list.clone(),
                k_re: *k_re,
                k_im: *k_im,
            };
            let cfg = overrides.apply(&load(cli)?)?;
            commands::cmd_converge(&cfg, cli.theta, *target, out, format)?;
        }
        Command::Pipeline => {
            let report = commands::cmd_pipeline(&load(cli)?, cli.theta, out)?;
            log::info!("pipeline finished, {} checks passed", report.checks.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SQUEEZELINE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command-line front end: designs quasi-phase-matched crystals, simulates
//! their joint spectra, runs design sweeps, reconstructs joint spectral
//! intensities from time tags and evaluates counting statistics.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::SweepParameter;
use config::RunConfig;
use qpmkit::counting::AbscissaKind;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or flags (exit code 2).
    Config(String),
    /// Unreadable or inconsistent data files (exit code 3).
    Data(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
        }
    }
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Random seed for stochastic operations.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepParamArg {
    Sigma,
    Duration,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AbscissaArg {
    Power,
    Gamma,
    GammaSquared,
}

impl From<AbscissaArg> for AbscissaKind {
    fn from(a: AbscissaArg) -> Self {
        match a {
            AbscissaArg::Power => AbscissaKind::PumpPowerMw,
            AbscissaArg::Gamma => AbscissaKind::Gamma,
            AbscissaArg::GammaSquared => AbscissaKind::GammaSquared,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a crystal domain configuration and its design report.
    Design {
        /// Periodic poling instead of the apodized design.
        #[arg(long)]
        flat: bool,
        /// Apodization width in mm (overrides the configuration).
        #[arg(long)]
        sigma_mm: Option<f64>,
        /// Crystal length in mm (overrides the configuration).
        #[arg(long)]
        length_mm: Option<f64>,
    },
    /// Simulate the joint spectral amplitude of a design.
    Simulate {
        /// Load the domain configuration from CSV instead of designing it.
        #[arg(long)]
        domains: Option<PathBuf>,
        /// Also export the complex amplitude (long-format CSV).
        #[arg(long)]
        complex: bool,
        /// Pump duration in ps (overrides the configuration).
        #[arg(long)]
        duration_ps: Option<f64>,
        /// Quartic filter FWHM in nm applied to both arms (overrides the
        /// configuration).
        #[arg(long)]
        filter_fwhm_nm: Option<f64>,
    },
    /// Sweep a design parameter and export the figures of merit.
    Sweep {
        #[arg(long, value_enum)]
        parameter: SweepParamArg,
    },
    /// Reconstruct a joint spectral intensity from time-tagged events.
    Reconstruct {
        /// Time-tag file: CSV (`channel,time_ps`) or 9-byte binary records
        /// (`.bin`/`.ttb`).
        #[arg(long)]
        input: PathBuf,
    },
    /// Counting statistics: heralding, collection efficiency, squeezing and
    /// the visibility fit.
    Rates {
        /// Rates CSV (documented column schema).
        #[arg(long)]
        rates: PathBuf,
        /// Optional visibility scan CSV for the zero-power extrapolation.
        #[arg(long)]
        scan: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "power")]
        abscissa: AbscissaArg,
        #[arg(long, default_value_t = 0.80)]
        detector_eff: f64,
        #[arg(long, default_value_t = 0.079)]
        optical_loss: f64,
    },
}

#[derive(Debug, Parser)]
#[command(name = "qpmkit", version, about = "Quasi-phase-matched photon-pair source toolkit")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = RunConfig::load(cli.common.config.as_ref())?;
    if let Some(seed) = cli.common.seed {
        config.seed = seed;
    }

    // Flag overrides win over the configuration file.
    match &cli.command {
        Command::Design {
            flat,
            sigma_mm,
            length_mm,
        } => {
            if *flat {
                config.crystal.flat = true;
            }
            if let Some(s) = sigma_mm {
                config.crystal.sigma_mm = Some(*s);
            }
            if let Some(l) = length_mm {
                config.crystal.length_mm = *l;
            }
        }
        Command::Simulate {
            duration_ps,
            filter_fwhm_nm,
            ..
        } => {
            if let Some(d) = duration_ps {
                config.pump.duration_ps = *d;
            }
            if let Some(f) = filter_fwhm_nm {
                config.filter = Some(config::FilterConfig {
                    fwhm_nm: *f,
                    center_nm: None,
                    arms: "both".into(),
                });
            }
        }
        _ => {}
    }
    config.validate()?;

    let out = &cli.common.out;
    match cli.command {
        Command::Design { .. } => commands::cmd_design(&config, out),
        Command::Simulate {
            domains, complex, ..
        } => commands::cmd_simulate(&config, domains.as_ref(), complex, out),
        Command::Sweep { parameter } => {
            let parameter = match parameter {
                SweepParamArg::Sigma => SweepParameter::Sigma,
                SweepParamArg::Duration => SweepParameter::Duration,
            };
            commands::cmd_sweep(&config, parameter, out)
        }
        Command::Reconstruct { input } => commands::cmd_reconstruct(&config, &input, out),
        Command::Rates {
            rates,
            scan,
            abscissa,
            detector_eff,
            optical_loss,
        } => commands::cmd_rates(
            &config,
            &rates,
            scan.as_ref(),
            abscissa.into(),
            detector_eff,
            optical_loss,
            out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qpmkit: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Data(_) => ExitCode::from(3),
            }
        }
    }
}

//! `coordenc`: analyse encoders, fit signals and benchmark the Kronecker solver.
//!
//! Exit codes: 0 on success, 1 on numerical or I/O failure, 2 on usage errors.

mod analyze;
mod bench;
mod config;
mod fit;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Core(#[from] coordenc::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(coordenc::Error::InvalidParameter { .. } | coordenc::Error::UnsupportedKind(_)) => 2,
            _ => 1,
        }
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Parser)]
#[command(
    name = "coordenc",
    version,
    about = "Shifted-basis positional encoders and Kronecker-product fitting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Seed for encoders, splits and initialisation.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solve through a truncated SVD instead of failing on rank deficiency.
    #[arg(long)]
    pinv: bool,
    /// Ridge added to every per-axis Gram matrix.
    #[arg(long)]
    ridge: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let overrides = Overrides {
            seed: self.seed,
            out: self.out.clone(),
            pinv: self.pinv,
            ridge: self.ridge,
        };
        ExperimentConfig::from_file(self.config.as_deref(), &overrides)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stable rank against N and distance against Δ for an encoder sweep.
    Analyze(Common),
    /// Fit one image, volume or tensor file and report PSNR, size and timings.
    Fit {
        #[command(flatten)]
        common: Common,
        /// PNG image, directory of PNG frames, or raw tensor file.
        input: PathBuf,
    },
    /// Time the mode-product and naive Kronecker evaluations.
    Bench(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(common) => {
            for path in analyze::run(&common.load()?)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Fit { common, input } => {
            let outcome = fit::run(&common.load()?, &input)?;
            let p = &outcome.report.psnr;
            let test = p.test.map(|t| format!("{t:.2}")).unwrap_or_else(|| "n/a".into());
            println!(
                "PSNR train {:.2} dB, test {test} dB, full {:.2} dB; {} parameters; solve {:.3} s",
                p.train, p.full, outcome.report.param_count, outcome.report.timings.solve
            );
            for path in outcome.files {
                println!("wrote {}", path.display());
            }
        }
        Command::Bench(common) => {
            for path in bench::run(&common.load()?)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

//! Command-line runner: scenario configs in, CSV data files and a manifest
//! out.

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod overrides;
pub mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Scenario;
use crate::error::CliError;
use crate::figures::{Figure, FigureConfig};
use crate::output::Artifacts;
use crate::run::{run_scenario, Command};

#[derive(Debug, Parser)]
#[command(name = "kicklens", version, about = "Delta-kick cooling with compound Gaussian lenses")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// Scenario (or figure) config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and maps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Config override, e.g. `--set protocol.expansion_time=5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Resolve kick strengths and write them.
    Design,
    /// Run the protocol and write the requested outputs (summary by default).
    Simulate,
    /// Sweep the focal time for each configured mode.
    Sweep,
    /// Doublet performance around the classical strengths.
    Sensitivity,
    /// Wigner map after the kick.
    Wigner,
    /// Data files behind a figure, from its bundled preset.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

pub fn main_with(cli: Cli) -> ExitCode {
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (command, art, default_out) = match &cli.verb {
        Verb::Reproduce { figure } => {
            let text = match &cli.config {
                Some(p) => read_config(p)?,
                None => figure.preset().to_string(),
            };
            let cfg = FigureConfig::parse(&text, &cli.set)?;
            if cfg.figure != *figure {
                return Err(CliError::Config(format!(
                    "config is for {}, not {}",
                    cfg.figure.name(),
                    figure.name()
                )));
            }
            let art = figures::reproduce(&cfg)?;
            (format!("reproduce {}", figure.name()), art, PathBuf::from(figure.name()))
        }
        verb => {
            let command = match verb {
                Verb::Design => Command::Design,
                Verb::Simulate => Command::Simulate,
                Verb::Sweep => Command::Sweep,
                Verb::Sensitivity => Command::Sensitivity,
                Verb::Wigner => Command::Wigner,
                Verb::Reproduce { .. } => unreachable!(),
            };
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| CliError::Config(format!("{} needs --config <path>", command.name())))?;
            let scenario = Scenario::parse(&read_config(path)?, &cli.set)?;
            let out = scenario.output_dir.clone().unwrap_or_else(|| PathBuf::from("kicklens-out"));
            let art: Artifacts = run_scenario(command, &scenario)?;
            (command.name().to_string(), art, out)
        }
    };
    let out = cli.out.clone().unwrap_or(default_out);
    art.write(&out, &command)
}

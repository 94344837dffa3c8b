//! Command-line driver: JSON configuration, scenario dispatch and the
//! summary/CSV outputs of the `bohm` binary.

pub mod config;
pub mod error;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use bohm_core::states::RotationSense;
use clap::Parser;

pub use config::{Overrides, RunConfig, ScenarioKind};
pub use error::CliError;
pub use run::{run, SummaryRecord};

#[derive(Debug, Parser)]
#[command(
    name = "bohm",
    version,
    about = "Bohmian trajectories of entangled spins in Stern-Gerlach magnets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub scenario: ScenarioKind,

    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Right magnet angle relative to the left one (rad).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,

    /// Output directory for the summary JSON and trajectory CSV.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Handedness of magnet rotations, +1 or -1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rotation_sense: Option<RotationSense>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            samples: self.samples,
            theta: self.theta,
            out: self.out.clone(),
            rotation_sense: self.rotation_sense,
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.apply(&self.overrides());
        config.resolve(self.scenario)
    }
}

/// Parses `args`, runs the scenario and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = cli.resolve().and_then(|c| run(&c));
    match result {
        Ok(record) => {
            println!(
                "{}: seed {} -> {}",
                record.scenario.name(),
                record.seed,
                record
                    .config
                    .out_dir()
                    .join(format!("{}.json", record.scenario.name()))
                    .display()
            );
            for w in &record.warnings {
                eprintln!("warning: {w}");
            }
            let code = record.exit_code();
            if code != 0 {
                eprintln!(
                    "error: {:.1}% of outcomes ambiguous",
                    100.0 * record.ambiguous_fraction()
                );
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

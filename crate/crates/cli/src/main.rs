mod commands;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "disperse",
    version,
    about = "Chromatic-dispersion compensation toolkit"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file (flat `key = value`).
    #[arg(long, global = true, env = "DISPERSE_DEFAULT_CONFIG")]
    pub config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Override any config key, e.g. `--set snr_db=16`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the compensating FIR taps.
    Design {
        #[arg(long)]
        n_taps: Option<usize>,
    },
    /// Cluster the taps and write the soft-decision plan.
    Cluster {
        #[arg(long)]
        n_taps: Option<usize>,
        #[arg(long)]
        n_clusters: Option<usize>,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Multiplications per symbol for engine operating points.
    Complexity {
        /// Direct FIR tap counts.
        #[arg(long, value_delimiter = ',')]
        td: Vec<usize>,
        /// Cluster counts.
        #[arg(long, value_delimiter = ',')]
        clustered: Vec<usize>,
        /// FFT sizes (half overlap).
        #[arg(long, value_delimiter = ',')]
        fd: Vec<usize>,
    },
    /// Run the simulated link once per seed.
    Simulate {
        #[arg(long)]
        engine: Option<String>,
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long)]
        n_taps: Option<usize>,
        #[arg(long)]
        n_clusters: Option<usize>,
    },
    /// Sweep tap count, cluster count or FFT size.
    Sweep {
        #[arg(long)]
        engine: Option<String>,
        #[arg(long, value_delimiter = ',')]
        grid: Vec<usize>,
        #[arg(long)]
        snr_db: Option<f64>,
    },
    /// Grid-search the soft-decision parameters for one cluster count.
    Optimize {
        #[arg(long)]
        n_clusters: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        alpha_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        eta_grid: Vec<f64>,
        #[arg(long)]
        snr_db: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cryolink",
    version,
    about = "Steady-state thermal model of cryogenic links between dilution refrigerators"
)]
pub struct Cli {
    /// Assembly document (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "cryolink-out")]
    pub out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads for sweeps and fits.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Solver setting override, e.g. `divide_tol=1e-5`. Repeatable.
    #[arg(long = "settings", global = true, value_name = "KEY=VALUE")]
    pub settings: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an assembly document and report field-level problems.
    Validate,
    /// Write the document of a standard assembly.
    Init {
        /// Total length, m.
        #[arg(long)]
        length: f64,
        /// `none`, `central` or a unit spacing in metres.
        #[arg(long, default_value = "none")]
        cu: String,
    },
    /// Solve all four stages and write temperature profiles.
    Solve,
    /// Solve standard assemblies over a range of lengths.
    Sweep {
        /// `start:stop:step` in metres, inclusive.
        #[arg(long)]
        lengths: String,
        /// Cooling unit spacing, m.
        #[arg(long)]
        cu_spacing: Option<f64>,
    },
    /// Longest standard assembly that meets every operating limit.
    FeasibleLength {
        /// `low:high` in metres.
        #[arg(long, default_value = "5:40")]
        bracket: String,
        #[arg(long)]
        cu_spacing: Option<f64>,
    },
    /// Reduce measurement data to model parameters.
    Fit {
        #[command(subcommand)]
        kind: FitCommand,
    },
    /// Insertion loss of a line in dB.
    Loss {
        /// Line length, m.
        #[arg(long)]
        length: f64,
        /// Attenuation, dB/km.
        #[arg(long)]
        alpha: f64,
    },
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// Measurement CSV.
    pub data: PathBuf,
    /// Sidecar metadata (JSON). Without it the first two columns are read as points.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum FitCommand {
    /// Copper RRR from conductivity samples or heater data.
    Rrr {
        #[command(flatten)]
        series: SeriesArgs,
        /// Smallest usable sensor difference, K.
        #[arg(long, default_value_t = cryolink::fitting::NOISE_FLOOR)]
        noise_floor: f64,
    },
    /// Power law `y = a x^b`.
    Powerlaw {
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Bulk and contact parts of a braid resistance.
    Braid {
        /// Total resistance CSV, `T_K,R_K_per_W`.
        total: PathBuf,
        /// Bulk resistance CSV on an increasing temperature grid.
        #[arg(long)]
        bulk: PathBuf,
        /// Relative size below which a contact resistance counts as zero.
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        /// Highest temperature used, K.
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// 50K attenuation from measured shield temperatures (`x_m,T_K`).
    Mli {
        data: PathBuf,
        /// Candidate attenuations, `start:stop:step`.
        #[arg(long, default_value = "0.001:0.05:0.001")]
        grid: String,
    },
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hypoco", version, about = "Hypocoercivity indices, staircase forms and decay certificates")]
pub struct Cli {
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct TolArgs {
    /// Relative rank cutoff.
    #[arg(long = "tol-rank", global = true)]
    pub rank: Option<f64>,
    /// Relative PSD tolerance.
    #[arg(long = "tol-psd", global = true)]
    pub psd: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// HC-index of a pair (J, R) by all three conditions.
    HcIndex {
        #[arg(long)]
        j: PathBuf,
        #[arg(long)]
        r: PathBuf,
        #[arg(long = "m-max")]
        m_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Staircase form and pencil classification of a triple.
    Staircase {
        #[arg(long, required_unless_present_all = ["e", "j", "r"], conflicts_with_all = ["e", "j", "r"])]
        triple: Option<PathBuf>,
        #[arg(long, requires_all = ["j", "r"])]
        e: Option<PathBuf>,
        #[arg(long, requires_all = ["e", "r"])]
        j: Option<PathBuf>,
        #[arg(long, requires_all = ["e", "j"])]
        r: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strict Lyapunov weight and certified decay rate.
    Lyapunov {
        #[arg(long)]
        j: PathBuf,
        #[arg(long)]
        r: PathBuf,
        /// Fixed eps parameters; tuned on a grid when absent.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Modal Oseen models.
    Oseen {
        #[command(subcommand)]
        command: OseenCommand,
    },
    /// Simulate a shear-drift configuration and write CSV/JSON artifacts.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the weight parameter of the config.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decay envelope report for a shear-drift configuration.
    DecayReport {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the weight parameter of the config.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Iso,
    Const,
    Sin,
}

#[derive(Debug, Subcommand)]
pub enum OseenCommand {
    /// Write the triple of one mode (iso, const) or one k1 block (sin).
    Build {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long, allow_hyphen_values = true)]
        k1: i64,
        /// Second wave number (iso and const models).
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        k2: i64,
        /// Truncation K (sin model).
        #[arg(long = "K", default_value_t = 8)]
        k_trunc: usize,
        #[arg(long)]
        nu: f64,
        /// Constant drift `b1,b2` (iso and const models).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
        b: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// alpha_min, lambda1_min samples, kappa and Q minors tables.
    Quant {
        /// One or more viscosities, comma separated.
        #[arg(long, value_delimiter = ',')]
        nu: Vec<f64>,
        #[arg(long = "k1-max")]
        k1_max: i64,
        /// One or more truncations, comma separated.
        #[arg(long = "K", value_delimiter = ',')]
        k_trunc: Vec<usize>,
        /// Weight parameters for the lambda1_min samples and Q minors.
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

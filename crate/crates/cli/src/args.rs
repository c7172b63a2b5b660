use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use srsd_core::Prewhitening;

#[derive(Debug, Parser)]
#[command(
    name = "srsd",
    version,
    about = "Sequential regime shift detection in mean, variance and correlation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect shifts in the mean of one or more columns.
    DetectMean(DetectArgs),
    /// Detect shifts in the variance of one or more columns of residuals.
    DetectVariance(DetectArgs),
    /// Run the three-step procedure on two columns.
    DetectCorrelation(CorrelationArgs),
    /// Write a synthetic series pair as CSV.
    Generate(GenerateArgs),
    /// Running correlations and per-index shift-index traces for two columns.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrewhitenArg {
    None,
    Mpk,
    Ip4,
}

impl From<PrewhitenArg> for Prewhitening {
    fn from(p: PrewhitenArg) -> Self {
        match p {
            PrewhitenArg::None => Prewhitening::None,
            PrewhitenArg::Mpk => Prewhitening::Mpk,
            PrewhitenArg::Ip4 => Prewhitening::Ip4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SkipArg {
    Mean,
    Variance,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Target significance level.
    #[arg(long = "p", default_value_t = 0.05)]
    pub p: f64,
    /// Cut-off length.
    #[arg(long = "l", default_value_t = 20)]
    pub l: usize,
    /// Red-noise removal applied to the inputs first.
    #[arg(long, value_enum, default_value_t = PrewhitenArg::None)]
    pub prewhiten: PrewhitenArg,
    /// Subsample size for the AR(1) estimate (default: max(5, (l + 1) / 3)).
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Value columns, by header name, comma separated.
    #[arg(long, short, value_delimiter = ',', required = true)]
    pub columns: Vec<String>,
    /// Column holding time labels (e.g. years).
    #[arg(long)]
    pub labels: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelationArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Significance level of the correlation step (default: --p).
    #[arg(long)]
    pub p_corr: Option<f64>,
    /// Cut-off length of the correlation step (default: --l).
    #[arg(long)]
    pub l_corr: Option<usize>,
    /// Confidence level of the regime correlation intervals.
    #[arg(long, default_value_t = 0.9)]
    pub confidence: f64,
    /// Steps to replace by the identity.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub skip: Vec<SkipArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// RNG seed (default: the seed in --spec, else 0); SRSD_SEED takes precedence.
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON RegimeSpec file; the 70-point reference experiment when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Running-correlation window.
    #[arg(long, default_value_t = 21)]
    pub window: usize,
    /// Also write per-index RSI/RSSI traces to this CSV file.
    #[arg(long)]
    pub traces: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

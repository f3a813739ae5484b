use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ppaw", version, about = "Heart-rate prediction with sparse sensor queries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (accel.csv, hr.csv, manifest.json).
    Synth(SynthArgs),
    /// Turn acceleration and heart-rate CSVs into a per-minute feature matrix.
    Extract(ExtractArgs),
    /// Offline baseline: same-phase split or cross-phase transfer.
    Offline(OfflineArgs),
    /// Online run; writes report.json and trace.csv.
    Ppaw(PpawArgs),
    /// One online run per O value; writes sweep.csv.
    #[command(name = "sweep-o")]
    SweepO(SweepArgs),
    /// Serve wearable sessions over TCP.
    Gateway(GatewayArgs),
    /// Replay a recording to a gateway.
    Wearable(WearableArgs),
    /// Plot data (minute, true and predicted bpm) from a trace.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    pub minutes_per_phase: u64,
    #[arg(long, default_value_t = 2)]
    pub phases: u32,
    /// Heart-rate offset added per phase (bpm).
    #[arg(long, default_value_t = 15.0)]
    pub drift: f64,
    /// Heart-rate noise standard deviation (bpm).
    #[arg(long, default_value_t = 3.0)]
    pub noise: f64,
    /// Accelerometer noise standard deviation (g).
    #[arg(long, default_value_t = 0.02)]
    pub accel_noise: f64,
    /// Accelerometer sample rate (Hz).
    #[arg(long, default_value_t = 50)]
    pub rate: u32,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory.
    #[arg(short = 'o', long = "out", default_value = "out")]
    pub out: PathBuf,
}

/// Where minute records come from.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DataSource {
    /// Dataset manifest written by `synth`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Feature matrix written by `extract`.
    #[arg(long)]
    pub features: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Dataset manifest; alternative to --accel/--hr/--rate.
    #[arg(long, conflicts_with_all = ["accel", "hr"], required_unless_present_all = ["accel", "hr"])]
    pub data: Option<PathBuf>,
    #[arg(long, requires = "hr")]
    pub accel: Option<PathBuf>,
    #[arg(long, requires = "accel")]
    pub hr: Option<PathBuf>,
    /// Accelerometer sample rate (Hz), used with --accel.
    #[arg(long, default_value_t = 50)]
    pub rate: u32,
    /// First minute of every phase, used with --accel.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub phase_boundaries: Vec<u64>,
    /// Output feature CSV.
    #[arg(short = 'o', long = "out", default_value = "out/features.csv")]
    pub out: PathBuf,
}

/// Ensemble parameters shared by the experiment commands.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Learners in the ensemble.
    #[arg(long = "L", default_value_t = 10)]
    pub l: usize,
    /// Maximum tree depth.
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
    /// Smallest number of rows in a leaf.
    #[arg(long, default_value_t = 1)]
    pub min_samples_leaf: usize,
    /// Seed for bootstrap resampling and splits.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Online-loop parameters except O.
#[derive(Debug, Clone, Args)]
pub struct OnlineArgs {
    /// Initial labelled minutes, variance history and label buffer size.
    #[arg(long = "N", default_value_t = 5)]
    pub n: usize,
    /// Predictions a learner makes before it is retrained.
    #[arg(long = "TTL", default_value_t = 10)]
    pub ttl: u64,
    /// Per-learner error (bpm) that triggers a retrain after a query.
    #[arg(long = "T", default_value_t = 10.0)]
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OfflineMode {
    SamePhase,
    CrossPhase,
}

#[derive(Debug, Args)]
pub struct OfflineArgs {
    #[command(flatten)]
    pub source: DataSource,
    #[arg(long, value_enum, default_value_t = OfflineMode::SamePhase)]
    pub mode: OfflineMode,
    /// Phase to split (same-phase) or to train on (cross-phase).
    #[arg(long, default_value_t = 0)]
    pub train_phase: u32,
    /// Phase to test on (cross-phase only).
    #[arg(long, default_value_t = 1)]
    pub test_phase: u32,
    #[arg(long, default_value_t = 0.6)]
    pub train_frac: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(short = 'o', long = "out", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PpawArgs {
    #[command(flatten)]
    pub source: DataSource,
    /// Outlier multiplier on the variance history's standard deviation.
    #[arg(long = "O", default_value_t = 3.0)]
    pub o: f64,
    #[command(flatten)]
    pub online: OnlineArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(short = 'o', long = "out", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: DataSource,
    /// Comma-separated O values.
    #[arg(long = "O", value_delimiter = ',', default_value = "1,2,3")]
    pub o: Vec<f64>,
    #[command(flatten)]
    pub online: OnlineArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(short = 'o', long = "out", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    /// Energy units per minute of acceleration sensing.
    #[arg(long, default_value_t = 1.0)]
    pub accel_cost: f64,
    /// Energy units per heart-rate measurement.
    #[arg(long, default_value_t = 5000.0)]
    pub ppg_cost: f64,
}

#[derive(Debug, Args)]
pub struct GatewayArgs {
    /// Address to listen on; the bound address is printed to stderr.
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub listen: String,
    /// Sessions to serve before exiting; more than one are served
    /// concurrently.
    #[arg(long, default_value_t = 1)]
    pub sessions: usize,
    /// Read timeout per message (seconds).
    #[arg(long, default_value_t = 30.0)]
    pub timeout: f64,
    /// Outlier multiplier on the variance history's standard deviation.
    #[arg(long = "O", default_value_t = 3.0)]
    pub o: f64,
    #[command(flatten)]
    pub online: OnlineArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub energy: EnergyArgs,
    #[arg(short = 'o', long = "out", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WearableArgs {
    /// Gateway address.
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub connect: String,
    /// Dataset manifest; alternative to --accel/--hr/--rate.
    #[arg(long, conflicts_with_all = ["accel", "hr"], required_unless_present_all = ["accel", "hr"])]
    pub data: Option<PathBuf>,
    #[arg(long, requires = "hr")]
    pub accel: Option<PathBuf>,
    #[arg(long, requires = "accel")]
    pub hr: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub rate: u32,
    #[arg(long, default_value = "patient")]
    pub patient_id: String,
    /// Replay at this multiple of real time instead of as fast as possible.
    #[arg(long)]
    pub realtime: Option<f64>,
    #[command(flatten)]
    pub energy: EnergyArgs,
    #[arg(short = 'o', long = "out", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Trace written by `ppaw` or `gateway`.
    #[arg(long)]
    pub trace: PathBuf,
    /// Dataset manifest supplying true bpm for every minute.
    #[arg(long, conflicts_with = "features")]
    pub data: Option<PathBuf>,
    /// Feature matrix supplying true bpm for every minute.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(short = 'o', long = "out", default_value = "out")]
    pub out: PathBuf,
}

//! Command-line surface: subcommands and flags.
//!
//! Multi-word flags use lower_snake_case, mirroring the JSON config keys
//! one-to-one so a flag value can be moved into a config file (and back)
//! without renaming.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Which estimated parameter a sweep or histogram scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Range,
    Velocity,
    Doppler,
}

/// Desk-scale WLAN-sensing laboratory: waveforms, channels, MAC
/// procedures, and accuracy evaluation, with CSV/JSON outputs.
#[derive(Debug, Parser)]
#[command(name = "sense-lab", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit the CE/Sync sounding sequences and the 8×8 Sync correlation matrix.
    Sequences(SequencesArgs),
    /// Evaluate auto/cross ambiguity maps and low-ambiguity-zone metrics.
    Ambiguity(AmbiguityArgs),
    /// Benchmark the four CSI quantization schemes on a seeded ensemble.
    QuantBench(QuantBenchArgs),
    /// Run one scenario through the channel, MAC exchange, and detector.
    Simulate(SimulateArgs),
    /// Accuracy-vs-SNR sweep producing a curve CSV.
    Sweep(SweepArgs),
    /// Per-sample accuracy histogram over the target trajectory.
    Hist(HistArgs),
}

#[derive(Debug, Args)]
pub struct SequencesArgs {
    /// Output directory (created if absent).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AmbiguityArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// First sequence: ce0, ce1, or sync1..sync8.
    #[arg(long, default_value = "ce0")]
    pub a: String,
    /// Second sequence for the cross map.
    #[arg(long, default_value = "ce1")]
    pub b: String,
    /// Chip rate the sequences are evaluated at.
    #[arg(long = "sample_rate_hz", default_value_t = 20.0e6)]
    pub sample_rate_hz: f64,
    /// Largest |delay| in the map and zone.
    #[arg(long = "max_delay_s", default_value_t = 1.0e-6)]
    pub max_delay_s: f64,
    /// Largest |Doppler| in the map and zone.
    #[arg(long = "max_doppler_hz", default_value_t = 1000.0)]
    pub max_doppler_hz: f64,
    /// Doppler grid size (forced odd so 0 Hz is on the grid).
    #[arg(long = "doppler_points", default_value_t = 41)]
    pub doppler_points: usize,
}

#[derive(Debug, Args)]
pub struct QuantBenchArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Ensemble size per scheme.
    #[arg(long, default_value_t = 1000)]
    pub matrices: u64,
    /// Subcarriers per matrix.
    #[arg(long = "n_subcarriers", default_value_t = 64)]
    pub n_subcarriers: usize,
    /// Ensemble seed (falls back to SENSE_LAB_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Burst/detector flags shared by the scenario-driven subcommands.
#[derive(Debug, Args)]
pub struct BurstArgs {
    /// Exchanges per burst (slow-time length).
    #[arg(long = "n_exchanges", default_value_t = 16)]
    pub n_exchanges: usize,
    /// Slow-time spacing between exchanges.
    #[arg(long = "intra_interval_s", default_value_t = 0.025)]
    pub intra_interval_s: f64,
    /// Channel impulse-response window in taps.
    #[arg(long = "n_taps", default_value_t = 64)]
    pub n_taps: usize,
    /// CFAR guard cells per side.
    #[arg(long = "guard_cells", default_value_t = 1)]
    pub guard_cells: usize,
    /// CFAR training cells per side.
    #[arg(long = "train_cells", default_value_t = 4)]
    pub train_cells: usize,
    /// CFAR design false-alarm probability.
    #[arg(long, default_value_t = 1.0e-3)]
    pub pfa: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON document.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub burst: BurstArgs,
    /// Input SNR per exchange; omit for noiseless.
    #[arg(long = "snr_db")]
    pub snr_db: Option<f64>,
    /// Subcarriers in the reported CSI (must cover n_taps).
    #[arg(long, default_value_t = 64)]
    pub subcarriers: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated, strictly increasing SNR points in dB.
    #[arg(long)]
    pub snr: String,
    /// Trials per SNR point.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Estimated parameter.
    #[arg(long, value_enum, default_value_t = KindArg::Range)]
    pub kind: KindArg,
    #[command(flatten)]
    pub burst: BurstArgs,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Input SNR for every sample.
    #[arg(long = "snr_db", default_value_t = 20.0)]
    pub snr_db: f64,
    /// Trajectory walks.
    #[arg(long, default_value_t = 4)]
    pub trials: usize,
    /// Samples per walk.
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
    /// Histogram bins.
    #[arg(long, default_value_t = 16)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Range)]
    pub kind: KindArg,
    #[command(flatten)]
    pub burst: BurstArgs,
    #[arg(long)]
    pub seed: Option<u64>,
}

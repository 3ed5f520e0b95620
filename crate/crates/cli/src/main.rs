//! `filterbank`: design auditory filterbanks and export the data behind
//! scale, coverage and Q-factor plots.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flag value; the message names the flag.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] filterbank_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) => 3,
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    /// `A·ln f + C` with the ERB `f / A`
    Log,
    /// Glasberg & Moore style ERB-rate scale with the ERB `D + E·f`
    LinearErb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// ERB model parameters shared by most commands.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Gammatone filter order.
    #[arg(long, default_value_t = 4)]
    pub order: u32,
    /// Slope of the logarithmic ERB `f / A`.
    #[arg(long, default_value_t = 7.7)]
    pub a: f64,
    /// Frequency where the logarithmic scale is zero (Hz).
    #[arg(long, default_value_t = 20.0)]
    pub fm: f64,
    /// Intercept of the linear ERB (Hz).
    #[arg(long, default_value_t = 24.7)]
    pub d: f64,
    /// Slope of the linear ERB.
    #[arg(long, default_value_t = 0.108)]
    pub e: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RangeArgs {
    /// Lowest center frequency (Hz).
    #[arg(long, default_value_t = 200.0)]
    pub fmin: f64,
    /// Highest center frequency (Hz).
    #[arg(long, default_value_t = 3600.0)]
    pub fmax: f64,
}

#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct BandCount {
    /// Number of bands.
    #[arg(long)]
    pub nbands: Option<usize>,
    /// Target frequency coverage; picks the smallest band count reaching it.
    #[arg(long)]
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    #[arg(long, value_enum, default_value_t = ScaleArg::Log)]
    pub scale: ScaleArg,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub count: BandCount,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Parser)]
#[command(name = "filterbank", version, about = "Auditory filterbank design toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select center frequencies, bandwidths, Q-factors and coverage.
    Design {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Omit the `generated_at` field from JSON output.
        #[arg(long)]
        reproducible: bool,
    },
    /// Both ERB-rate scales over a frequency grid, plus the selected centers.
    ScaleExport {
        #[command(flatten)]
        range: RangeArgs,
        /// Number of centers marked on each scale.
        #[arg(long, default_value_t = 16)]
        nbands: usize,
        #[arg(long, default_value_t = 20.0)]
        grid_min: f64,
        #[arg(long, default_value_t = 20000.0)]
        grid_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form coverage of both scales for 2..=nbands-max bands.
    CoverageSweep {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, default_value_t = 64)]
        nbands_max: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gammatone Q-factor `f / (k(n)·ERB(f))` under both ERB models.
    QfactorSweep {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the logarithmic ERB slope A to a `freq_hz,erb_hz` CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 24.7)]
        d: f64,
        #[arg(long, default_value_t = 0.108)]
        e: f64,
        /// Where to write the comparison curves (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize and mix harmonic speakers into a 16-bit WAV.
    Synth {
        /// Speaker spec JSON; repeat for several speakers.
        #[arg(long = "speaker", required = true)]
        speakers: Vec<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
        #[arg(long, default_value_t = 16000)]
        sample_rate: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a WAV through a gammatone filterbank.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        design: DesignArgs,
        /// Per-band WAVs are written to `<prefix>_band<b>.wav`.
        #[arg(long)]
        out_prefix: PathBuf,
        /// Per-band RMS CSV (stdout if omitted).
        #[arg(long)]
        rms_out: Option<PathBuf>,
    },
    /// Magnitude response of a single gammatone filter.
    Response {
        #[arg(long)]
        center: f64,
        #[arg(long, value_enum, default_value_t = ScaleArg::Log)]
        scale: ScaleArg,
        #[arg(long, default_value_t = 16000)]
        sample_rate: u32,
        #[arg(long)]
        fft_len: Option<usize>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Design {
            design,
            format,
            out,
            reproducible,
        } => commands::design(&design, format, out.as_deref(), reproducible),
        Command::ScaleExport {
            range,
            nbands,
            grid_min,
            grid_max,
            points,
            model,
            out,
        } => commands::scale_export(&range, nbands, (grid_min, grid_max, points), &model, out.as_deref()),
        Command::CoverageSweep {
            range,
            nbands_max,
            model,
            out,
        } => commands::coverage_sweep(&range, nbands_max, &model, out.as_deref()),
        Command::QfactorSweep {
            range,
            points,
            model,
            out,
        } => commands::qfactor_sweep(&range, points, &model, out.as_deref()),
        Command::Fit { input, d, e, out } => commands::fit(&input, d, e, out.as_deref()),
        Command::Synth {
            speakers,
            duration,
            sample_rate,
            out,
        } => commands::synth(&speakers, duration, sample_rate, &out),
        Command::Filter {
            input,
            design,
            out_prefix,
            rms_out,
        } => commands::filter(&input, &design, &out_prefix, rms_out.as_deref()),
        Command::Response {
            center,
            scale,
            sample_rate,
            fft_len,
            model,
            out,
        } => commands::response(center, scale, sample_rate, fft_len, &model, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream reader (`head`, ...) closed stdout early
        Err(CliError::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

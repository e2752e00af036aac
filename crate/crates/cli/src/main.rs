//! `ranksinr`: closed-form and simulated SINR statistics under multi-rank interference.

mod commands;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ranksinr::montecarlo::{SymbolModel, DEFAULT_CHUNK, DEFAULT_SAMPLES};
use ranksinr::report::Format;
use ranksinr::scenario::OwnMode;
use ranksinr::sweep::DEFAULT_TARGET_OUTAGE;
use ranksinr::Error;

#[derive(Parser)]
#[command(
    name = "ranksinr",
    version,
    about = "SINR and outage of BF/OSTBC receivers under multi-rank MIMO interference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// SINR density on a dB grid.
    Pdf(CurveArgs),
    /// Outage probability on a threshold grid (dB).
    Outage(CurveArgs),
    /// γ₀ gain of rank-r over rank-1 interference for the configured scenario.
    Gain(GainArgs),
    /// Gain versus SNR (dB grid).
    SweepSnr(GainArgs),
    /// Gain versus INR of the interferers (dB grid).
    SweepInr(GainArgs),
    /// Gain versus number of equal-power interferers at constant total INR.
    SweepN(SweepNArgs),
    /// Closed form against Monte Carlo; exits with 4 when the check fails.
    McValidate(ValidateArgs),
    /// Projection-term approximation chain.
    ApproxValidate(ApproxArgs),
    /// Eigenvalue density weights for the configured antenna counts.
    DumpWeights(DumpArgs),
    /// Interference mixture coefficients for the configured scenario.
    DumpXi(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario JSON; the built-in reference scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the own transmission mode.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct McArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Samples per independently seeded chunk.
    #[arg(long, default_value_t = DEFAULT_CHUNK)]
    chunk_size: usize,
    #[arg(long, value_enum, default_value_t = Symbols::UnitModulus)]
    symbols: Symbols,
}

#[derive(Args, Clone)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    /// START:STOP:STEP in dB.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Append Monte Carlo columns.
    #[arg(long)]
    mc: bool,
    #[command(flatten)]
    mc_args: McArgs,
}

#[derive(Args, Clone)]
struct GainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Interference rank compared against rank 1; all ranks up to min(n_r, n_t) when omitted.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TARGET_OUTAGE)]
    target_outage: f64,
}

#[derive(Args, Clone)]
struct SweepNArgs {
    #[command(flatten)]
    gain: GainArgs,
    /// Comma-separated interferer counts.
    #[arg(long, default_value = "1,2,3,4,5,6")]
    counts: String,
    /// Total INR in dB; the configured total when omitted.
    #[arg(long, allow_hyphen_values = true)]
    total_inr: Option<f64>,
}

#[derive(Args, Clone)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[command(flatten)]
    mc_args: McArgs,
}

#[derive(Args, Clone)]
struct ApproxArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    n_t: Option<usize>,
    #[arg(long, default_value_t = 1)]
    n_l: usize,
    #[arg(long, default_value_t = ranksinr::approx::DEFAULT_GRID_MAX)]
    x_max: f64,
    #[arg(long, default_value_t = ranksinr::approx::DEFAULT_GRID_POINTS)]
    points: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
}

#[derive(Args, Clone)]
struct DumpArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    n_t: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Bf,
    Ostbc,
}

impl From<Mode> for OwnMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Bf => OwnMode::Beamforming,
            Mode::Ostbc => OwnMode::Ostbc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Symbols {
    UnitModulus,
    Gaussian,
}

impl From<Symbols> for SymbolModel {
    fn from(s: Symbols) -> Self {
        match s {
            Symbols::UnitModulus => SymbolModel::UnitModulus,
            Symbols::Gaussian => SymbolModel::Gaussian,
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NumericInstability(_) => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, result) = commands::run(cli.command);
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &common.out {
        Some(path) => File::create(path).map_err(Error::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            ranksinr::report::write(common.format.into(), &output.meta, &output.table, &mut w)?;
            w.flush().map_err(Error::from)
        }),
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            ranksinr::report::write(common.format.into(), &output.meta, &output.table, &mut w)
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    if output.failed {
        eprintln!("validation failed");
        return ExitCode::from(EXIT_VALIDATION);
    }
    ExitCode::SUCCESS
}

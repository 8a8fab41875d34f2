//! `hsikit`: dataset synthesis, frequency analysis, restoration and
//! evaluation for hyperspectral cubes.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 data or shape error.

mod analysis;
mod eval;
mod failure;
mod synth;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hsikit_core::degrade::PromptFormat;

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "hsikit", version, about = "Hyperspectral degradation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate degraded/clean cube pairs with prompts and recipes.
    Synth(SynthArgs),
    /// Fit a per-bin frequency-domain affine model to a clean/degraded pair.
    Analyze(AnalyzeArgs),
    /// Invert a fitted model on a degraded cube.
    Restore(RestoreArgs),
    /// Append quality metrics of a test cube against a reference.
    Eval(EvalArgs),
}

/// Worker thread count: a positive integer or `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

fn parse_threads(s: &str) -> Result<Threads, String> {
    if s == "auto" {
        return Ok(Threads::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Threads::Fixed(n)),
        _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Procedural clean scenes of size `H W [C]` (C defaults to 172).
    #[arg(long, num_args = 2..=3, value_names = ["H", "W", "C"], conflicts_with = "input", required_unless_present = "input")]
    pub procedural: Option<Vec<usize>>,
    /// Directory of clean `.hsc` cubes, used in sorted file-name order.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Number of items (default: 1 procedural, or one per input cube).
    #[arg(long)]
    pub count: Option<usize>,
    /// Probability that each degradation family fires.
    #[arg(long, default_value_t = 0.5)]
    pub prob: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "short")]
    pub format: PromptFormat,
    /// Endmember count of procedural scenes.
    #[arg(long, default_value_t = 6)]
    pub materials: usize,
    #[arg(long, default_value = "auto", value_parser = parse_threads)]
    pub threads: Threads,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub clean: PathBuf,
    #[arg(long)]
    pub degraded: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub bins: usize,
    /// Model CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for residual-spectrum PGMs.
    #[arg(long)]
    pub spectra_dir: Option<PathBuf>,
    /// Bands to export as residual spectra (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub bands: Vec<usize>,
    #[arg(long, default_value = "auto", value_parser = parse_threads)]
    pub threads: Threads,
}

#[derive(Debug, Args)]
pub struct RestoreArgs {
    #[arg(long)]
    pub degraded: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = hsikit_core::freq::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Clean cube; when given, PSNR before and after is reported.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value = "auto", value_parser = parse_threads)]
    pub threads: Threads,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, required_unless_present = "manifest", requires = "test")]
    pub reference: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest", requires = "reference")]
    pub test: Option<PathBuf>,
    /// Evaluate every degraded/ground-truth pair listed in a synth manifest.
    #[arg(long, conflicts_with_all = ["reference", "test"])]
    pub manifest: Option<PathBuf>,
    /// Metrics CSV; rows are appended, the header is written once.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub range: f64,
    /// Also compute the training loss terms.
    #[arg(long)]
    pub losses: bool,
    /// Loss CSV (default: `<out>` with a `.losses.csv` suffix).
    #[arg(long, requires = "losses")]
    pub losses_out: Option<PathBuf>,
    #[arg(long, default_value = "auto", value_parser = parse_threads)]
    pub threads: Threads,
}

fn thread_pool(threads: Threads) -> Result<rayon::ThreadPool, Failure> {
    let n = match threads {
        Threads::Auto => 0,
        Threads::Fixed(n) => n,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Failure::data(format!("cannot start worker threads: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let threads = match &cli.command {
        Command::Synth(a) => a.threads,
        Command::Analyze(a) => a.threads,
        Command::Restore(a) => a.threads,
        Command::Eval(a) => a.threads,
    };
    let pool = thread_pool(threads)?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => synth::run(a),
        Command::Analyze(a) => analysis::analyze(a),
        Command::Restore(a) => analysis::restore(a),
        Command::Eval(a) => eval::run(a),
    })
}

/// Parses `args` (program name first) and runs the selected command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

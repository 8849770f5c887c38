//! `iterexp`: evaluate non-integer iterates of exp, export domain-coloring
//! grids and interpolation curves, check layer gradients and run the
//! pattern-shift demo.
//!
//! Exit codes: 0 success, 1 failed check or I/O error, 2 usage error,
//! 3 domain or numeric error.

mod commands;
mod literal;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use literal::parse_complex;

#[derive(Debug, Parser)]
#[command(name = "iterexp", version, about = "Non-integer iterates of exp and the addiplication operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate exp^(n) and its derivatives at one point.
    Eval(EvalArgs),
    /// Sample chi or exp^(n) on a rectangle and write a CSV grid.
    Grid(GridArgs),
    /// Sample x (+)_n y over n in [0, 1] with both backends.
    Interp(InterpArgs),
    /// Compare a layer's analytic gradients with finite differences.
    Gradcheck(GradcheckArgs),
    /// Run the circular pattern-shift network.
    Shift(ShiftArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Abel,
    Schroeder,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SchroederOpts {
    /// Lower edge of the imaginary part of log, in (-1, 0).
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true, value_parser = finite)]
    pub beta: f64,
    /// Radius of the local-solution disk around the fixed point.
    #[arg(long, default_value_t = 1e-6, value_parser = finite)]
    pub r0: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("operand").required(true).args(["z", "x"])))]
pub struct EvalArgs {
    /// Complex operand, e.g. 1+3.14159i.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub z: Option<Complex64>,
    /// Real operand.
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub x: Option<f64>,
    /// Iterate order.
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub n: f64,
    #[arg(long, value_enum, default_value_t = BackendKind::Schroeder)]
    pub backend: BackendKind,
    #[command(flatten)]
    pub schroeder: SchroederOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantityKind {
    Chi,
    ExpIter,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true, value_parser = finite)]
    pub re_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true, value_parser = finite)]
    pub re_max: f64,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true, value_parser = finite)]
    pub im_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true, value_parser = finite)]
    pub im_max: f64,
    /// Samples along the real axis.
    #[arg(long, default_value_t = 241)]
    pub nx: usize,
    /// Samples along the imaginary axis.
    #[arg(long, default_value_t = 241)]
    pub ny: usize,
    #[arg(long, value_enum, default_value_t = QuantityKind::Chi)]
    pub quantity: QuantityKind,
    /// Iterate order for `--quantity exp-iter`.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true, value_parser = finite)]
    pub n: f64,
    /// CSV destination; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub schroeder: SchroederOpts,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub x: Complex64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub y: Complex64,
    /// Samples over n in [0, 1], endpoints included.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// CSV destination; stdout when omitted (the summary then goes to stderr).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub schroeder: SchroederOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayerKind {
    Additive,
    Product,
    Addiplication,
    Split,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, value_enum)]
    pub layer: LayerKind,
    /// Seed for the random weights, orders and input.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Finite-difference step, in [1e-8, 1e-4].
    #[arg(long, default_value_t = 1e-4, value_parser = finite)]
    pub eps: f64,
    /// Backend of the iterate layers.
    #[arg(long, value_enum, default_value_t = BackendKind::Schroeder)]
    pub backend: BackendKind,
    /// Perturb one analytic gradient entry, to test the checker itself.
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShiftMode {
    Analytic,
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Random,
    Analytic,
}

#[derive(Debug, Args)]
pub struct ShiftArgs {
    /// Pattern length; at most 32 (analytic) or 8 (train).
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = ShiftMode::Analytic)]
    pub mode: ShiftMode,
    /// Evaluate every pattern and shift instead of a sample (analytic mode).
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampled instances (analytic) or training instances per trial.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01, value_parser = finite)]
    pub lr: f64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,
    #[arg(long, value_enum, default_value_t = InitKind::Random)]
    pub init: InitKind,
    /// JSON destination; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn finite(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("'{s}' is not a finite number")),
    }
}

/// Sizes the global rayon pool from `ITEREXP_THREADS`, if set.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("ITEREXP_THREADS") else {
        return Ok(());
    };
    let threads = match raw.trim().parse::<usize>() {
        Ok(k) if k > 0 => k,
        _ => return Err(format!("ITEREXP_THREADS must be a positive integer, got '{raw}'")),
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Eval(a) => commands::eval(&a),
        Command::Grid(a) => commands::grid(&a),
        Command::Interp(a) => commands::interp(&a),
        Command::Gradcheck(a) => commands::gradcheck(&a),
        Command::Shift(a) => commands::shift(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(msg) = f.message() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(f.exit_code())
        }
    }
}

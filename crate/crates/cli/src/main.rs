use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hef_core::Manifold;

mod commands;
mod input;

#[derive(Parser, Debug)]
#[command(name = "hef", version, about = "Harmonic exponential families on S1, S2 and SO(3)")]
struct Cli {
    /// Worker threads for transforms (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a MAP model to a point dataset.
    Fit(FitArgs),
    /// Per-point log-likelihood of a model on a dataset.
    Eval(EvalArgs),
    /// k-fold cross-validation over bandlimits and regularization strengths.
    Crossval(CrossvalArgs),
    /// Rotation posterior from a pair of sampled spherical signals.
    Posterior(PairArgs),
    /// Most probable rotation for a signal pair or a stored posterior.
    Map(MapArgs),
    /// Normalised density of a model on a sampling grid.
    ExportGrid(ExportArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_parser = parse_manifold)]
    manifold: Manifold,
    #[arg(long, default_value_t = 2.0)]
    oversample: f64,
    /// Plancherel regularization strength (0 disables the penalty).
    #[arg(long, default_value_t = 0.0)]
    reg: f64,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    bandlimit: usize,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long)]
    input: PathBuf,
    /// Model file to write.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args, Debug)]
struct CrossvalArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated bandlimits.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    bandlimit: Vec<usize>,
    /// Comma-separated regularization strengths; overrides --reg.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    regs: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = hef_core::optimize::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long)]
    input: PathBuf,
    /// Report file; the per-fold table goes to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// Grid files of the observed signal `x` and the template `y`.
    #[arg(long, num_args = 2, required = true)]
    input: Vec<PathBuf>,
    #[arg(long)]
    sigma: f64,
    /// Signal bandlimit (default: one below the grid bandlimit).
    #[arg(long)]
    bandlimit: Option<usize>,
    /// Prior model over SO3 (default: uniform).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MapArgs {
    /// Grid files of `x` and `y`; without them --model is the posterior.
    #[arg(long, num_args = 2)]
    input: Vec<PathBuf>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    bandlimit: Option<usize>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Search grid bandlimit (default: twice the posterior bandlimit).
    #[arg(long)]
    grid_bandlimit: Option<usize>,
    #[arg(long, default_value_t = hef_core::bayes_rotation::DEFAULT_REFINE_STEPS)]
    refine_steps: usize,
    /// Posterior model file to write.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    grid_bandlimit: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_manifold(s: &str) -> Result<Manifold, String> {
    s.parse::<Manifold>()
        .map_err(|_| format!("unknown manifold '{s}' (expected s1, s2 or so3)"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Eval(a) => commands::eval(a),
        Command::Crossval(a) => commands::crossval(a),
        Command::Posterior(a) => commands::posterior(a),
        Command::Map(a) => commands::map(a),
        Command::ExportGrid(a) => commands::export_grid(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

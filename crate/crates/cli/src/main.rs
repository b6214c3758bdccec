use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod report;

use error::CliError;

/// Largest space accepted without `--allow-large`.
pub const DIM_CAP: usize = 32;

#[derive(Parser, Debug)]
#[command(
    name = "lecam",
    version,
    about = "Bayes value, Le Cam deficiency and feature quality on finite experiments"
)]
struct Cli {
    /// Accept spaces larger than 32 symbols (prints a warning).
    #[arg(long, global = true)]
    allow_large: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bayes value of an experiment and its Bayes rule.
    Value(ValueArgs),
    /// Directed deficiency of one experiment with respect to another.
    Deficiency(DeficiencyArgs),
    /// Learn a deterministic autoencoder for a distribution.
    Autoencode(AutoencodeArgs),
    /// Learn a greedy stack of autoencoders.
    Stack(StackArgs),
    /// Learn loss-aware features by alternating minimization.
    Ib(IbArgs),
    /// Run the seeded property suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ValueArgs {
    file: PathBuf,
    #[arg(long)]
    experiment: String,
    #[arg(long)]
    prior: String,
    #[arg(long)]
    loss: String,
}

#[derive(Args, Debug)]
struct DeficiencyArgs {
    file: PathBuf,
    /// Experiment that is garbled (`T`).
    #[arg(long)]
    from: String,
    /// Experiment to be reproduced (`U`).
    #[arg(long)]
    to: String,
    /// Weight hypotheses by this prior.
    #[arg(long, conflicts_with = "sup", required_unless_present = "sup")]
    prior: Option<String>,
    /// Worst case over hypotheses instead of a prior.
    #[arg(long)]
    sup: bool,
    #[arg(long, default_value_t = lecam::deficiency::FACTOR_TOL)]
    factor_tol: f64,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct AutoencodeArgs {
    file: PathBuf,
    /// Distribution to reconstruct.
    #[arg(long)]
    prior: String,
    #[arg(long)]
    latent: usize,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug)]
struct StackArgs {
    file: PathBuf,
    #[arg(long)]
    prior: String,
    /// Latent sizes from the data upward, e.g. `4,2,1`.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug)]
struct IbArgs {
    file: PathBuf,
    #[arg(long)]
    experiment: String,
    #[arg(long)]
    prior: String,
    #[arg(long)]
    loss: String,
    #[arg(long)]
    latent: usize,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Trials per suite; each suite has its own default.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    max_dim: usize,
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    let limits = commands::Limits {
        allow_large: cli.allow_large,
    };
    match cli.command {
        Command::Value(a) => commands::value(&limits, &a.file, &a.experiment, &a.prior, &a.loss),
        Command::Deficiency(a) => commands::deficiency(
            &limits,
            &a.file,
            &a.from,
            &a.to,
            a.prior.as_deref(),
            a.factor_tol,
        ),
        Command::Autoencode(a) => commands::autoencode(
            &limits,
            &a.file,
            &a.prior,
            a.latent,
            &commands::Training {
                restarts: a.train.restarts,
                iters: a.train.iters,
                seed: a.train.seed,
            },
        ),
        Command::Stack(a) => commands::stack(
            &limits,
            &a.file,
            &a.prior,
            &a.sizes,
            &commands::Training {
                restarts: a.train.restarts,
                iters: a.train.iters,
                seed: a.train.seed,
            },
        ),
        Command::Ib(a) => commands::ib(
            &limits,
            &a.file,
            commands::IbRefs {
                experiment: &a.experiment,
                prior: &a.prior,
                loss: &a.loss,
            },
            a.latent,
            a.beta,
            a.iters,
            a.seed,
        ),
        Command::Verify(a) => commands::verify(&limits, &a.suite, a.trials, a.seed, a.max_dim),
    }
}

/// Prints a report; a closed stdout (e.g. piped into `head`) is not an error.
fn emit(out: &serde_json::Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(out).expect("reports serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(CliError::PropertyFailure(out)) => {
            emit(&out);
            eprintln!("lecam: some properties failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("lecam: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

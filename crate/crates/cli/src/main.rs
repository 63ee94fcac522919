//! `ordinal`: run the robust ordinal decision layer, fast-and-frugal trees
//! and decision-centric evaluation from the command line.
//!
//! Exit status: 0 success, 1 validation failure, 2 parse or I/O failure,
//! 3 refused operation.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ordinal_core::DecisionError;

#[derive(Debug, Parser)]
#[command(name = "ordinal", version, about = "Robust ordinal decision layer")]
struct Cli {
    /// What to print on stdout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    /// Also write the structured report to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    /// The full staged layer.
    Pipeline,
    /// Feasible actions not ε-dominated by another feasible action.
    Maximality,
    EAdmissible,
    GammaMaximin,
    /// Needs exactly one preference member.
    MinimaxRegret,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderingArg {
    Validity,
    Accuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StraddlePolicy {
    Abstain,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbationArg {
    Gaussian,
    Missingness,
    Flip,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario file against every structural invariant.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run a decision rule on a scenario.
    Decide {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Rule::Pipeline)]
        rule: Rule,
        /// Override the scenario's ε.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Apply a saved frugal tree to every row of a cue table.
    DecideFft {
        /// Tree file written by `learn-fft`.
        #[arg(long)]
        tree: PathBuf,
        /// CSV of cue readings; `lo..hi` cells are intervals, empty or NA is missing.
        #[arg(long)]
        input: PathBuf,
        /// Outcome when an interval straddles the final threshold.
        #[arg(long, value_enum, default_value_t = StraddlePolicy::Abstain)]
        straddle: StraddlePolicy,
    },
    /// Learn a frugal tree from a labelled cue table.
    LearnFft {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = OrderingArg::Validity)]
        ordering: OrderingArg,
        /// Re-rank cues on the rows reaching each level.
        #[arg(long)]
        conditional: bool,
        /// Where to write the tree for `decide-fft`.
        #[arg(long)]
        tree_out: Option<PathBuf>,
    },
    /// Decision curve and perturbation flip rates for a classified cohort.
    Evaluate {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated threshold probabilities.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.3, 0.4, 0.5])]
        thresholds: Vec<f64>,
        #[arg(long, value_enum, default_value_t = PerturbationArg::Gaussian)]
        perturbation: PerturbationArg,
        /// Noise scale for gaussian perturbation.
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
        /// Probability for missingness or flip perturbation.
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the shipped psoriasis vignette.
    Vignette,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Refused(String),
    #[error("validation failed")]
    ValidationFailed,
}

impl CliError {
    fn status(&self) -> u8 {
        match self {
            CliError::ValidationFailed | CliError::Invalid(_) => 1,
            CliError::Io { .. } | CliError::Parse(_) => 2,
            CliError::Refused(_) => 3,
        }
    }
}

impl From<DecisionError> for CliError {
    fn from(e: DecisionError) -> Self {
        match e {
            DecisionError::Parse(m) => CliError::Parse(m),
            DecisionError::Refused(m) => CliError::Refused(m),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

/// What a command produced: a text rendering and the structured report.
pub struct Output {
    pub text: String,
    pub json: String,
    /// Set when the command ran but its verdict is a failure.
    pub failed: bool,
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Validate { input } => commands::validate(input),
        Command::Decide { input, rule, epsilon } => commands::decide(input, *rule, *epsilon),
        Command::DecideFft { tree, input, straddle } => commands::decide_fft(tree, input, *straddle),
        Command::LearnFft { input, depth, ordering, conditional, tree_out } => {
            commands::learn_fft(input, *depth, *ordering, *conditional, tree_out.as_deref())
        }
        Command::Evaluate { input, thresholds, perturbation, sigma, p, draws, seed } => {
            commands::evaluate(input, thresholds, *perturbation, *sigma, *p, *draws, *seed)
        }
        Command::Vignette => commands::vignette(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Text => print!("{}", out.text),
                Format::Structured => print!("{}", out.json),
            }
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, &out.json) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if out.failed {
                ExitCode::from(CliError::ValidationFailed.status())
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status())
        }
    }
}

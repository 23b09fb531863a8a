//! shredkit: tablature token corpus tooling.
//!
//! Subcommands cover the full pipeline: validate token files, analyze a
//! labeled corpus into feature reports, extract annotated solos, train and
//! sample an artist-conditioned generator, classify corpora, and compare
//! generated output against groundtruth with divergence matrices.
//!
//! Exit codes: 0 success, 1 domain failure (empty corpus, failed
//! validation, missing configurations), 2 I/O or usage failure.

mod commands;
mod report;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use shredkit::stylelm::{Mode, PromptKind};

#[derive(Debug)]
pub enum CmdError {
    /// Exit code 1: the inputs are readable but the operation cannot
    /// produce a result.
    Domain(String),
    /// Exit code 2: unreadable or unwritable files, malformed sidecars.
    Io(String),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Domain(message) | CmdError::Io(message) => f.write_str(message),
        }
    }
}

impl CmdError {
    fn exit_code(&self) -> i32 {
        match self {
            CmdError::Domain(_) => 1,
            CmdError::Io(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "shredkit",
    version,
    about = "Guitar tablature token corpus analysis, generation and classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check token files for grammar violations.
    Validate {
        /// Token files to check.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Compute per-artist style features and rank-sum tests for a corpus.
    Analyze {
        /// Corpus root (artist subdirectories of .tokens.txt files).
        #[arg(long)]
        corpus: PathBuf,
        /// Output directory for reports.
        #[arg(long)]
        out: PathBuf,
        /// Additionally write gnuplot scripts next to the CSVs.
        #[arg(long)]
        emit_gnuplot: bool,
    },
    /// KLD matrices between groundtruth and generated distributions.
    Compare {
        /// Groundtruth corpus root.
        #[arg(long)]
        groundtruth: PathBuf,
        /// Generated corpus root (artist/CONFIG subdirectories).
        #[arg(long)]
        generated: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Additive smoothing constant for the divergences.
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
    },
    /// Extract annotated solo sections into a standalone corpus.
    ExtractSolos {
        /// Corpus root the annotation paths are relative to.
        #[arg(long)]
        corpus: PathBuf,
        /// JSON annotation sidecar.
        #[arg(long)]
        annotations: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the conditioned generator and sample songs per artist.
    TrainGenerate {
        /// Training corpus root.
        #[arg(long)]
        corpus: PathBuf,
        /// Generation mode: multi (2048-token budget) or solo (256).
        #[arg(long)]
        mode: Mode,
        /// Prompt kind: full (first two measures) or empty (one note).
        #[arg(long)]
        prompt: PromptKind,
        /// Songs to generate per artist.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Base random seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// n-gram order.
        #[arg(long, default_value_t = shredkit::stylelm::DEFAULT_ORDER)]
        order: usize,
        /// Artist/global interpolation weight.
        #[arg(long, default_value_t = shredkit::stylelm::DEFAULT_LAMBDA)]
        lambda: f64,
        /// Add-k smoothing constant.
        #[arg(long = "add-k", default_value_t = shredkit::stylelm::DEFAULT_ADD_K)]
        add_k: f64,
        /// Sampling temperature.
        #[arg(long, default_value_t = shredkit::stylelm::DEFAULT_TEMPERATURE)]
        temperature: f64,
        /// Optional top-k truncation.
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Train the classifier, report held-out accuracy, and score generated
    /// corpora into a 16-row table.
    Classify {
        /// Labeled corpus root; split into train/validation/test.
        #[arg(long)]
        corpus: PathBuf,
        /// Optional generated corpus root to score.
        #[arg(long)]
        generated: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Laplace smoothing constant.
        #[arg(long, default_value_t = shredkit::classify::DEFAULT_ALPHA)]
        alpha: f64,
        /// Split seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Train/validation/test ratios.
        #[arg(long, default_value = "0.55,0.20,0.25")]
        split: String,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SHREDKIT_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { paths } => commands::validate::run(&paths),
        Command::Analyze {
            corpus,
            out,
            emit_gnuplot,
        } => commands::analyze::run(&corpus, &out, emit_gnuplot),
        Command::Compare {
            groundtruth,
            generated,
            out,
            epsilon,
        } => commands::compare::run(&groundtruth, &generated, &out, epsilon),
        Command::ExtractSolos {
            corpus,
            annotations,
            out,
        } => commands::extract_solos::run(&corpus, &annotations, &out),
        Command::TrainGenerate {
            corpus,
            mode,
            prompt,
            n,
            seed,
            out,
            order,
            lambda,
            add_k,
            temperature,
            top_k,
        } => commands::train_generate::run(commands::train_generate::Args {
            corpus,
            mode,
            prompt,
            n,
            seed,
            out,
            order,
            lambda,
            add_k,
            temperature,
            top_k,
        }),
        Command::Classify {
            corpus,
            generated,
            out,
            alpha,
            seed,
            split,
        } => commands::classify::run(&corpus, generated.as_deref(), &out, alpha, seed, &split),
    };

    match result {
        Ok(()) => {}
        Err(error) => {
            eprintln!("error: {error}");
            std::process::exit(error.exit_code());
        }
    }
}

//! `hdtm`: ingest document graphs, train the hierarchy sampler and evaluate
//! the result.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] hdtm::Error),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Runtime(hdtm::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(hdtm::Error::from)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Parser)]
#[command(name = "hdtm", version, about = "Infer document hierarchies and topics from document graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a corpus file from an edge list and a JSON-lines document file.
    Ingest(IngestArgs),
    /// Run the sampler and write diagnostics, samples and the MAP hierarchy.
    Train(TrainArgs),
    /// Evaluate hierarchies and human judgments.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Edge file, one `source<TAB>target` pair of document ids per line.
    #[arg(long)]
    pub edges: PathBuf,
    /// Document file, JSON lines `{"id", "title"?, "text", "categories"?}`.
    #[arg(long)]
    pub docs: PathBuf,
    /// Id of the root document.
    #[arg(long)]
    pub root: String,
    /// Redirect file, one `from<TAB>to` pair per line.
    #[arg(long)]
    pub redirects: Option<PathBuf>,
    /// Corpus file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Corpus file written by `ingest`.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Restart probability of the path prior, in (0, 1).
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    /// Topic smoothing, > 0.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Level smoothing, > 0. Recorded for provenance.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Total sweeps.
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    /// Sweeps discarded before the first sample.
    #[arg(long, default_value_t = 2000)]
    pub burnin: usize,
    /// Sweeps between collected samples.
    #[arg(long, default_value_t = 20)]
    pub lag: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run the bulk-synchronous sampler with this many workers. Without it
    /// the serial sampler runs; one worker reproduces it exactly.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Words listed per node in samples and the MAP export.
    #[arg(long, default_value_t = 7)]
    pub top_words: usize,
    /// Barriers between checkpoints of the parallel sampler.
    #[arg(long, default_value_t = 50)]
    pub checkpoint_every: u64,
    /// Checkpoint directory of the parallel sampler; none are written without it.
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Certainty of each node's MAP parent across samples.
    Certainty(CertaintyArgs),
    /// Category agreement of each document with its ancestors.
    Jaccard(JaccardArgs),
    /// Model precision from document-intrusion judgments.
    Precision(PrecisionArgs),
    /// Similarity between a hierarchy and a reference graph.
    Similarity(SimilarityArgs),
    /// Generate document-intrusion tasks from a hierarchy.
    IntrusionGen(IntrusionArgs),
    /// Build a baseline hierarchy without the model.
    Baseline(BaselineArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct CertaintyArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Directory of sample files written by `train`.
    #[arg(long)]
    pub samples: PathBuf,
    /// JSON report; a CSV table is written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct JaccardArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Hierarchy file: a MAP export or a baseline.
    #[arg(long)]
    pub hierarchy: PathBuf,
    /// Categories as JSON lines `{"id", "categories"}`. Defaults to the
    /// categories stored in the corpus.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Certainty report used to bin the coefficients.
    #[arg(long)]
    pub certainty: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PrecisionArgs {
    /// Judgments as JSON lines `{"task_id", "presented", "intruder", "selections", "model"?}`.
    #[arg(long)]
    pub judgments: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimilarityArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub hierarchy: PathBuf,
    /// Reference edge file (`source<TAB>target`); defaults to the corpus graph.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Seed groups of the affinity solve; one per node when absent.
    #[arg(long)]
    pub groups: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct IntrusionArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub hierarchy: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Task file, JSON lines.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKindArg {
    Bfs,
    RandomParent,
}

#[derive(Debug, Args, Serialize)]
pub struct BaselineArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub kind: BaselineKindArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hierarchy file; a DOT rendering is written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(e) => match e {
            EvalCommand::Certainty(a) => commands::certainty(&a),
            EvalCommand::Jaccard(a) => commands::jaccard(&a),
            EvalCommand::Precision(a) => commands::precision(&a),
            EvalCommand::Similarity(a) => commands::similarity(&a),
            EvalCommand::IntrusionGen(a) => commands::intrusion(&a),
            EvalCommand::Baseline(a) => commands::baseline(&a),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}\n\nFor more information, try '--help'."),
                CliError::Runtime(r) => eprintln!("error: {r}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

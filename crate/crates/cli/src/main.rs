use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use postdoc_core::Error;

mod commands;
mod output;

#[derive(Parser)]
#[command(
    name = "postdoc",
    version,
    about = "Multimodal document summarization and poster synthesis"
)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// How embeddings in corpus files are read.
#[derive(Args, Clone, Copy)]
pub struct EmbeddingArgs {
    /// Treat embeddings as raw and normalize them on load.
    #[arg(long)]
    pub raw: bool,

    /// Offset added after the per-dimension shift when normalizing.
    #[arg(long, default_value_t = postdoc_core::corpus::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

/// Summary size: a fixed element count or a token budget.
#[derive(Args, Clone, Copy)]
pub struct BudgetArgs {
    /// Select exactly K elements instead of filling the token budget.
    #[arg(short, long)]
    pub k: Option<usize>,

    /// Token budget for the selected text (about 4 characters per token).
    #[arg(long, default_value_t = 3000)]
    pub token_budget: usize,
}

#[derive(Args, Clone)]
pub struct RemoteArgs {
    /// Never contact a language model.
    #[arg(long)]
    pub offline: bool,

    /// Paraphrase through a chat-completion service at the default endpoint.
    #[arg(long, conflicts_with = "offline")]
    pub remote: bool,

    /// Chat-completion endpoint URL; implies --remote.
    #[arg(long, conflicts_with = "offline")]
    pub endpoint: Option<String>,

    #[arg(long)]
    pub model: Option<String>,

    #[arg(long)]
    pub temperature: Option<f64>,

    /// Request timeout in seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a raw corpus and write it with normalized embeddings.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Embeddings are already nonnegative and L1-normalized; only validate.
        #[arg(long)]
        pre_normalized: bool,
        #[arg(long, default_value_t = postdoc_core::corpus::DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Learn selector weights from documents with ground-truth summaries.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the training report here (it always goes to stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        max_epochs: usize,
        #[arg(long, default_value_t = 3)]
        patience: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Apply the hinge subgradient on every step, not only while the hinge is active.
        #[arg(long)]
        ungated: bool,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        embeddings: EmbeddingArgs,
    },
    /// Select a multimodal summary for every document of a corpus.
    Summarize {
        /// Weights file; uniform weights when omitted.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        doc: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        embeddings: EmbeddingArgs,
    },
    /// Score summaries against ground truth.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        /// Corpus file carrying ground truth.
        #[arg(long)]
        gold: PathBuf,
        /// Corpus file with embeddings, for coverage and diversity.
        #[arg(long)]
        source: Option<PathBuf>,
        /// Compute cosines on the embeddings as stored in the source file.
        #[arg(long)]
        raw_cosine: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        embeddings: EmbeddingArgs,
    },
    /// Turn a summary into poster topics and bullets.
    Paraphrase {
        #[arg(long)]
        summary: PathBuf,
        /// Document to use when the summary file holds several.
        #[arg(long)]
        doc_id: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        remote: RemoteArgs,
    },
    /// Place poster content into boxes.
    Layout {
        #[arg(long)]
        content: PathBuf,
        /// TOML layout configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print aesthetic scores of a layout.
    ScoreLayout {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive background, box and text colors from a palette.
    Palette {
        /// Comma-separated hex colors; a built-in palette when omitted.
        #[arg(long)]
        colors: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a layout as SVG.
    Render {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        content: PathBuf,
        #[arg(long)]
        roles: PathBuf,
        #[arg(long, default_value = postdoc_core::render::DEFAULT_FONT)]
        font: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize, paraphrase, lay out and render one document.
    Poster {
        #[arg(long)]
        doc: PathBuf,
        #[arg(long)]
        doc_id: Option<String>,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        colors: Option<String>,
        #[arg(long, default_value = postdoc_core::render::DEFAULT_FONT)]
        font: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        #[command(flatten)]
        remote: RemoteArgs,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        Error::Remote(_) => 4,
        _ => 2,
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("postdoc: usage error: {}", one_line(first));
            return ExitCode::from(2);
        }
    };

    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("postdoc: {}", one_line(&e.to_string()));
            ExitCode::from(exit_code(&e))
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lvsde::io::{InputFormat, LabelColumn, Metaphor};
use lvsde::{Metric, RepulsionMode};

mod commands;

#[derive(Parser)]
#[command(name = "lvsde", version, about = "Two-layer vertex splitting embeddings")]
struct Cli {
    /// Log progress (-v) or debug detail (-vv) to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Embed a data set and write an embedding document.
    Embed(EmbedArgs),
    /// Print layered KNN accuracy for the six layer combinations.
    Evaluate(EvaluateArgs),
    /// Draw an embedding document as SVG.
    Render(RenderArgs),
    /// List duplicated instances with a projection inside a rectangle.
    QueryRect(QueryArgs),
}

#[derive(Args)]
pub struct EmbedArgs {
    /// Input table (comma or whitespace separated).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "vectors")]
    pub format: InputFormat,
    /// Column holding class labels: an index from 0 or `last`.
    #[arg(long)]
    pub label_column: Option<LabelColumn>,
    /// The first data line is a header.
    #[arg(long)]
    pub header: bool,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub metric: Option<Metric>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub p_hat: Option<usize>,
    #[arg(long)]
    pub z: Option<usize>,
    #[arg(long)]
    pub u_bar: Option<f64>,
    /// Iterations of the four phases, e.g. 500,450,390,490.
    #[arg(long, value_delimiter = ',')]
    pub iterations: Option<Vec<usize>>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub frame_margin: Option<f64>,
    /// Keep a snapshot every N iterations.
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// Write every snapshot as a document into this directory.
    #[arg(long, requires = "snapshots")]
    pub snapshot_dir: Option<PathBuf>,
    /// Output the snapshot with the best red+gray accuracy at this k instead
    /// of the final state. Needs labels and --snapshots.
    #[arg(long, requires = "snapshots")]
    pub select_best: Option<usize>,
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub mode: Option<RepulsionMode>,
    /// Document path; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Embedding document with labels.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 15)]
    pub k: usize,
    /// Let an instance's other projection vote for it.
    #[arg(long)]
    pub include_own_instance: bool,
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, default_value = "circle-gray")]
    pub metaphor: Metaphor,
    #[arg(long, default_value_t = 800.0)]
    pub width: f64,
    #[arg(long, default_value_t = 800.0)]
    pub height: f64,
    #[arg(long, default_value_t = 4.0)]
    pub radius: f64,
    #[arg(long)]
    pub no_legend: bool,
}

#[derive(Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Corners as x0,y0,x1,y1.
    #[arg(long, allow_hyphen_values = true)]
    pub rect: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Embed(args) => commands::embed(&args, &mut stdout),
        Command::Evaluate(args) => commands::evaluate(&args, &mut stdout),
        Command::Render(args) => commands::render(&args),
        Command::QueryRect(args) => commands::query(&args, &mut stdout),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

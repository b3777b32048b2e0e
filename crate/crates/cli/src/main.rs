//! `hetfs`: ingest, precompute and query meta-path similarity over a
//! heterogeneous network.

mod commands;
mod config;
mod repl;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hetfs_core::engine::EngineKind;
use hetfs_core::ContentMode;
use thiserror::Error;

use crate::config::{ConfigError, ProjectConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hetfs_core::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "hetfs",
    version,
    about = "Meta-path similarity search over heterogeneous networks"
)]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true, env = config::ENV_CONFIG)]
    config: Option<PathBuf>,
    /// Dataset directory (overrides `data`).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Snapshot and weight-table directory (overrides `store`).
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the dataset files and write a binary graph snapshot.
    Ingest,
    /// Compute centrality, relation contribution and content tables.
    Precompute(PrecomputeArgs),
    /// Top-k similar nodes for one query node.
    Query(QueryArgs),
    /// Interactive queries over a graph loaded once.
    Repl(EngineArgs),
    /// Evaluation harness.
    Eval(EvalArgs),
    /// Print the relation contribution graph in DOT format.
    Contribution(ContributionArgs),
    /// Write a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct PrecomputeArgs {
    /// Centrality damping c_n.
    #[arg(long)]
    node_decay: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(short, long)]
    k: Option<usize>,
    #[arg(long)]
    engine: Option<EngineKind>,
    #[arg(long)]
    walks: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Path decay c.
    #[arg(long)]
    decay: Option<f64>,
    /// node, pair or off.
    #[arg(long)]
    content_mode: Option<ContentMode>,
    /// Print JSON instead of TSV.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// External id of the query node.
    node: String,
    /// Comma-separated symmetric meta-paths, e.g. `APA,APVPA`.
    #[arg(long, conflicts_with = "free", required_unless_present = "free")]
    mp: Option<String>,
    /// Use every symmetric meta-path up to this length.
    #[arg(long)]
    free: Option<usize>,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalTask {
    Linkpred,
    Cluster,
    Classify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scorer {
    Hetfs,
    Random,
}

#[derive(Debug, Args)]
struct EvalArgs {
    task: EvalTask,
    /// Relation whose links are predicted (linkpred).
    #[arg(long)]
    relation: Option<String>,
    /// `time:T` keeps edges with time ≤ T; `random:R` keeps a fraction R.
    #[arg(long, default_value = "random:0.8")]
    split: String,
    /// Longest meta-path considered.
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long, value_enum, default_value = "hetfs")]
    scorer: Scorer,
    #[arg(short, long)]
    k: Option<usize>,
    /// Labelled fraction used as seeds (cluster, classify).
    #[arg(long, default_value_t = 0.1)]
    train_fraction: f64,
    /// Label file (cluster, classify).
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ContributionArgs {
    /// Replace a relation weight, `R=value`; repeatable.
    #[arg(long = "set", value_name = "R=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Bibliographic author/paper/term/venue network.
    Dblp,
    /// Two-block author/paper/venue network with labels.
    Planted,
    /// Types and relations from `--types` and `--relation`.
    Custom,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    preset: Preset,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size multiplier (dblp).
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// `A=100,B=50` (custom).
    #[arg(long)]
    types: Option<String>,
    /// `NAME:SRC:DST:EDGES`, repeatable (custom). Append `:undirected` for a
    /// symmetric relation within one type.
    #[arg(long = "relation")]
    relations: Vec<String>,
    /// Endpoint skew (custom).
    #[arg(long, default_value_t = 0.0)]
    skew: f64,
    /// Attach years `START:END` to every edge.
    #[arg(long)]
    years: Option<String>,
    /// Attach random text to one type, `TYPE:FIELD:VOCAB:WORDS`.
    #[arg(long)]
    text: Option<String>,
}

fn resolve_config(cli: &Cli) -> CliResult<ProjectConfig> {
    let mut cfg = ProjectConfig::load(cli.config.as_deref())?;
    if let Some(d) = &cli.data {
        cfg.data = d.clone();
    }
    if let Some(s) = &cli.store {
        cfg.store = s.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    if let Command::Synth(args) = &cli.command {
        return commands::synth(args, out);
    }
    let mut cfg = resolve_config(&cli)?;
    match cli.command {
        Command::Ingest => commands::ingest(&cfg, out),
        Command::Precompute(a) => {
            if let Some(v) = a.node_decay {
                cfg.set("node_decay", &v.to_string(), "--node-decay", "".as_ref())?;
            }
            if let Some(v) = a.tolerance {
                cfg.set("tolerance", &v.to_string(), "--tolerance", "".as_ref())?;
            }
            if let Some(v) = a.max_iter {
                cfg.max_iter = v;
            }
            commands::precompute(&cfg, out)
        }
        Command::Query(a) => {
            a.engine.apply(&mut cfg)?;
            commands::query(&cfg, &a.node, a.mp.as_deref(), a.free, a.engine.json, out)
        }
        Command::Repl(a) => {
            a.apply(&mut cfg)?;
            let stdin = std::io::stdin();
            repl::run(&cfg, a.json, &mut stdin.lock(), out)
        }
        Command::Eval(a) => commands::eval(&cfg, &a, out),
        Command::Contribution(a) => commands::contribution(&cfg, &a.overrides, out),
        Command::Synth(_) => unreachable!("handled above"),
    }
}

impl EngineArgs {
    /// Flags override the file and environment values.
    fn apply(&self, cfg: &mut ProjectConfig) -> CliResult {
        let base = std::path::Path::new("");
        let pairs = [
            ("k", self.k.map(|v| v.to_string())),
            ("walks", self.walks.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("epsilon", self.epsilon.map(|v| v.to_string())),
            ("decay", self.decay.map(|v| v.to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v, &format!("--{key}"), base)?;
            }
        }
        if let Some(e) = self.engine {
            cfg.engine = e;
        }
        if let Some(m) = self.content_mode {
            cfg.content_mode = m;
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! `cogscreen`: transcript ingestion, features, embeddings, training,
//! augmentation, text similarity, LLM judging and reporting.

mod commands;
mod config;
mod context;
mod error;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cogscreen_core::corpus::Split;
use cogscreen_core::net::NetworkPolicy;
use cogscreen_core::neuralnet::ModelKind;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::context::Ctx;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "cogscreen", version, about = "Transcript-based cognitive-impairment screening pipeline")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides paths.out.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated seeds; overrides `seeds`.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// Whether remote providers may be contacted.
    #[arg(long, global = true, value_enum, default_value_t = Network::Forbidden)]
    network: Network,
    /// More logging (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Network {
    Forbidden,
    Allowed,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Model {
    Embedding,
    Linguistic,
    Fusion,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Embedding => ModelKind::Embedding,
            Model::Linguistic => ModelKind::Linguistic,
            Model::Fusion => ModelKind::Fusion,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Metric {
    Bleu,
    Bertscore,
    Tsne,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Shape {
    Default,
    Full,
}

fn parse_split(s: &str) -> Result<String, String> {
    Split::parse(s).map(|x| x.to_string()).ok_or_else(|| format!("unknown split {s:?} (train, validation, test)"))
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Load the manifest and write the normalised corpus and word-count statistics.
    Ingest,
    /// Extract the linguistic feature table.
    Features,
    /// Fetch sentence (and optionally token) embeddings into the store.
    EmbedFetch {
        /// Also fetch per-token vectors.
        #[arg(long)]
        tokens: bool,
    },
    /// Train one model family over all seeds.
    Train {
        #[arg(long, value_enum)]
        model: Model,
    },
    /// Write the fine-tuning dataset and resolved generator settings.
    AugmentExport,
    /// Generate multiplier x |train| synthetic transcripts.
    AugmentGenerate {
        #[arg(long)]
        generator: String,
        #[arg(long, default_value_t = 5)]
        multiplier: usize,
    },
    /// Retrain on real plus synthetic data at each multiplier.
    AugmentSweep {
        #[arg(long)]
        generator: String,
        /// `1..5`, `2..=4` or `1,3,5`; defaults to augment.multipliers.
        #[arg(long)]
        multipliers: Option<String>,
    },
    /// Similarity between synthetic and real transcripts.
    Quality {
        #[arg(long, value_enum)]
        metric: Metric,
        /// Restrict to these generators (repeatable); default is all generated.
        #[arg(long = "generator")]
        generators: Vec<String>,
        /// Use only the first N synthetic samples per generator.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Zero-shot classification by a chat model.
    Judge {
        #[arg(long, default_value = "test", value_parser = parse_split)]
        split: String,
    },
    /// Render figures and tables from the reports directory.
    Report {
        /// Reports directory; defaults to `<out>/reports`.
        #[arg(long, value_name = "DIR")]
        reports: Option<PathBuf>,
    },
    /// Write a synthetic toy dataset with manifest and config.
    MakeToy {
        #[arg(long, value_name = "DIR")]
        #[serde(skip)]
        dest: PathBuf,
        #[arg(long, value_enum, default_value_t = Shape::Default)]
        shape: Shape,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Features => "features",
            Command::EmbedFetch { .. } => "embed-fetch",
            Command::Train { .. } => "train",
            Command::AugmentExport => "augment-export",
            Command::AugmentGenerate { .. } => "augment-generate",
            Command::AugmentSweep { .. } => "augment-sweep",
            Command::Quality { .. } => "quality",
            Command::Judge { .. } => "judge",
            Command::Report { .. } => "report",
            Command::MakeToy { .. } => "make-toy",
        }
    }

    fn uses_network(&self) -> bool {
        matches!(self, Command::AugmentGenerate { .. } | Command::EmbedFetch { .. } | Command::Judge { .. })
    }

    /// Run-manifest name; several invocations of one command get distinct files.
    fn run_name(&self) -> String {
        match self {
            Command::Train { model } => format!("train-{}", ModelKind::from(*model).as_str()),
            Command::AugmentGenerate { generator, .. } => format!("augment-generate-{generator}"),
            Command::AugmentSweep { generator, .. } => format!("augment-sweep-{generator}"),
            Command::Quality { metric, .. } => {
                format!("quality-{}", serde_json::to_value(metric).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
            }
            other => other.name().to_string(),
        }
    }
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_ansi(std::io::IsTerminal::is_terminal(&std::io::stderr()))
        .with_target(false)
        .try_init();
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    if let Command::MakeToy { dest, shape, seed } = &cli.command {
        return commands::make_toy(dest, matches!(shape, Shape::Full), *seed);
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.paths.out = out.clone();
    }
    if let Some(seeds) = &cli.seed_list {
        if seeds.is_empty() {
            return Err(CliError::Usage("--seed-list must name at least one seed".into()));
        }
        cfg.seeds = seeds.clone();
    }
    cfg.validate()?;
    let network = match (cli.network, cli.command.uses_network()) {
        (Network::Allowed, true) => NetworkPolicy::Allowed,
        (Network::Allowed, false) => {
            tracing::info!("{} never uses the network; ignoring --network=allowed", cli.command.name());
            NetworkPolicy::Forbidden
        }
        (Network::Forbidden, _) => NetworkPolicy::Forbidden,
    };
    let args = serde_json::to_value(&cli.command).map_err(|e| CliError::stage("args", e))?;
    let mut ctx = Ctx::new(cfg, network, &cli.command.run_name(), args);
    let summary = match &cli.command {
        Command::Ingest => commands::ingest(&mut ctx)?,
        Command::Features => commands::features(&mut ctx)?,
        Command::EmbedFetch { tokens } => commands::embed_fetch(&mut ctx, *tokens)?,
        Command::Train { model } => commands::train_model(&mut ctx, (*model).into())?,
        Command::AugmentExport => commands::augment_export(&mut ctx)?,
        Command::AugmentGenerate { generator, multiplier } => commands::augment_generate(&mut ctx, generator, *multiplier)?,
        Command::AugmentSweep { generator, multipliers } => {
            let ks = match multipliers {
                Some(s) => commands::parse_multipliers(s)?,
                None => ctx.cfg.augment.multipliers.clone(),
            };
            commands::augment_sweep(&mut ctx, generator, &ks)?
        }
        Command::Quality { metric, generators, limit } => {
            let m = match metric {
                Metric::Bleu => "bleu",
                Metric::Bertscore => "bertscore",
                Metric::Tsne => "tsne",
            };
            commands::quality(&mut ctx, m, generators, *limit)?
        }
        Command::Judge { split } => commands::judge(&mut ctx, Split::parse(split).expect("validated by clap"))?,
        Command::Report { reports } => report::render_report(&mut ctx, reports.clone())?,
        Command::MakeToy { .. } => unreachable!("handled above"),
    };
    ctx.finish()?;
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

mod commands;
mod config;
mod provenance;

use clap::{Parser, Subcommand};
use commands::{Ctx, StageError};
use config::{ConfigError, RunConfig, VariantSet};
use std::path::PathBuf;
use std::process::ExitCode;

/// Specification-inference benchmark pipeline.
#[derive(Parser, Debug)]
#[command(name = "specbench", version, about)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input corpus directory (overrides `corpus`).
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Prompt style (overrides `style`).
    #[arg(long, global = true)]
    style: Option<String>,
    /// Worker threads (overrides `workers`).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Which records generate/verify run over: all, natural or none.
    #[arg(long, global = true, value_parser = parse_variants)]
    variants: Option<VariantSet>,
    #[command(subcommand)]
    command: Command,
}

fn parse_variants(s: &str) -> Result<VariantSet, String> {
    match s {
        "all" => Ok(VariantSet::All),
        "natural" => Ok(VariantSet::Natural),
        "none" => Ok(VariantSet::None),
        _ => Err(format!("expected all, natural or none, got `{s}`")),
    }
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Validate the input corpus and copy it into the output directory
    Ingest,
    /// Build variant corpora with the semantic-preserving transforms
    Transform,
    /// Generate mutants of every base program
    Mutate,
    /// Ask the model for specifications
    Generate,
    /// Verify generated specifications (and mutant pairs when present)
    Verify,
    /// Compute SR/FR/CR/flip-rate tables
    Score,
    /// Categorize verifier failures
    Triage,
    /// Run the self-repair loop on failing base specifications
    Repair,
    /// Assemble the text report
    Report,
    /// Every stage in order
    Run,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Transform => "transform",
            Command::Mutate => "mutate",
            Command::Generate => "generate",
            Command::Verify => "verify",
            Command::Score => "score",
            Command::Triage => "triage",
            Command::Repair => "repair",
            Command::Report => "report",
            Command::Run => "run",
        }
    }
}

const STAGES: [(&str, fn(&Ctx) -> Result<String, StageError>); 9] = [
    ("ingest", commands::ingest),
    ("transform", commands::transform),
    ("mutate", commands::mutate),
    ("generate", commands::generate),
    ("verify", commands::verify),
    ("score", commands::score),
    ("triage", commands::triage_cmd),
    ("repair", commands::repair),
    ("report", commands::report),
];

fn config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = &cli.corpus {
        cfg.corpus = Some(c.clone());
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = &cli.style {
        cfg.style = s.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(v) = cli.variants {
        cfg.variants = v;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), (&'static str, StageError)> {
    let name = cli.command.name();
    let cfg = config(cli).map_err(|e| (name, e.into()))?;
    let cx = Ctx::new(cfg).map_err(|e| (name, e))?;
    for (stage, f) in STAGES {
        if name == "run" || name == stage {
            log::info!("running {stage}");
            let msg = f(&cx).map_err(|e| (stage, e))?;
            println!("{stage}: {msg}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((stage, e)) => {
            let record = serde_json::json!({
                "error": { "command": cli.command.name(), "stage": stage, "kind": e.kind(), "message": e.to_string() }
            });
            eprintln!("{record}");
            ExitCode::from(e.exit_code())
        }
    }
}

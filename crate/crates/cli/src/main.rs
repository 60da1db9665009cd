mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clausemorph::sampler::TaskKind;

use config::{FileConfig, Overrides, RunConfig};

/// A configuration or invocation mistake; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "clausemorph", version, about = "Build clause-level inflection tables and tasks")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Language data directory (grammar.txt, unimorph.tsv, freq.txt, exclude.txt, frames.tsv).
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Seed for all sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write features flattened (`NOM1;NOMSG`) instead of nested.
    #[arg(long, global = true)]
    flat_features: bool,
    /// Learning-curve train sizes, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    curve_sizes: Option<Vec<usize>>,
    /// Learning-curve train lexeme counts, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    curve_lexemes: Option<Vec<usize>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a grammar and realize one clause per TAM cell for a probe verb.
    ValidateGrammar {
        /// Probe lemma; defaults to the most frequent verb with a word table.
        #[arg(long)]
        probe: Option<String>,
    },
    /// Build clause tables for the sampled, annotated verbs.
    BuildTables,
    /// Sample train/dev/test task files from built tables.
    SampleTasks {
        /// inflection, reinflection, analysis or all.
        #[arg(long, default_value = "all")]
        task: String,
        /// Tables file; defaults to tables.tsv in the output directory.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Score prediction files against a gold task file.
    Evaluate(EvaluateArgs),
    /// Paradigm statistics of one or more table files.
    Stats {
        /// `LABEL=PATH` or `PATH`; defaults to the configured tables.
        #[arg(long)]
        tables: Vec<String>,
        /// layered, flattened or both.
        #[arg(long, default_value = "both")]
        counting: String,
    },
    /// Start the frame-annotation service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    task: TaskKind,
    #[arg(long)]
    gold: PathBuf,
    /// One file per run.
    #[arg(long = "pred", required = true)]
    preds: Vec<PathBuf>,
    /// Write the full report as JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Mismatches to list per run.
    #[arg(long, default_value_t = 0)]
    show: usize,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(
        file,
        Overrides {
            data_dir: cli.data_dir,
            output: cli.output,
            seed: cli.seed,
            flat_features: cli.flat_features,
            curve_sizes: cli.curve_sizes,
            curve_lexemes: cli.curve_lexemes,
        },
    );
    match cli.command {
        Command::ValidateGrammar { probe } => commands::validate_grammar(&cfg, probe.as_deref()),
        Command::BuildTables => commands::build_tables(&cfg),
        Command::SampleTasks { task, tables } => commands::sample_tasks(&cfg, &task, tables),
        Command::Evaluate(a) => commands::evaluate(a.task, &a.gold, &a.preds, a.report.as_deref(), a.show),
        Command::Stats { tables, counting } => commands::stats(&cfg, &tables, &counting),
        Command::Serve { port, host } => commands::serve(&cfg, &host, port.unwrap_or(cfg.port)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CLAUSEMORPH_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

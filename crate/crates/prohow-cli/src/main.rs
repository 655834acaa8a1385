use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use prohow_cli::{Pipeline, PipelineConfig};

/// Know-how graph pipeline: extract process graphs from how-to documents,
/// link them to an entity catalog and to each other, and score the links.
#[derive(Parser)]
#[command(name = "prohow", version, about)]
struct Cli {
    /// Path to the pipeline configuration file.
    #[arg(short, long, global = true, default_value = "prohow.conf")]
    config: PathBuf,

    /// Override a config key, e.g. --set tau=0.9 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize raw corpus files into the canonical document format.
    Ingest,
    /// Convert canonical documents into the corpus graph.
    Extract,
    /// Link process inputs/outputs to the entity catalog.
    LinkEntities,
    /// Build the text index over primitive entities.
    Index,
    /// Train the decomposition-link classifier from labeled pairs.
    Train,
    /// Classify candidates and emit accepted decomposition links.
    LinkDecomposition,
    /// Compare machine links against community cross references.
    Evaluate,
    /// Print corpus totals from the extraction report.
    Stats,
    /// Run every stage in order.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match PipelineConfig::load(&cli.config, &cli.overrides) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("prohow: configuration error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let pipeline = Pipeline::new(config);
    let (stage, result) = match cli.command {
        Command::Ingest => ("ingest", pipeline.ingest()),
        Command::Extract => ("extract", pipeline.extract()),
        Command::LinkEntities => ("link-entities", pipeline.link_entities()),
        Command::Index => ("index", pipeline.index()),
        Command::Train => ("train", pipeline.train()),
        Command::LinkDecomposition => ("link-decomposition", pipeline.link_decomposition()),
        Command::Evaluate => ("evaluate", pipeline.evaluate()),
        Command::Stats => ("stats", pipeline.stats().map(|out| print!("{out}"))),
        Command::All => ("all", pipeline.run_all()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("prohow: stage `{stage}` failed: {e:#}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use causalrel::pipeline::Side;
use causalrel_cli::commands::{self, AnalyzeArgs};
use causalrel_cli::CliError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "causalrel", version, about = "Causal reading of encoding and decoding relevance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run encoding, decoding, aggregation and interpretation on subject CSVs.
    Analyze {
        /// Run configuration (`key = value` lines).
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Overrides `output_json`.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Overrides `output_text`.
        #[arg(long)]
        text: Option<PathBuf>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Sample a cohort from a SEM fixture and print its oracle relevance.
    Simulate {
        fixture: PathBuf,
        #[arg(long, default_value_t = 17)]
        subjects: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Decide whether a set of nodes d-separates two nodes.
    Dsep {
        dag: PathBuf,
        a: String,
        b: String,
        /// Conditioning nodes, repeated or comma separated.
        #[arg(short, long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Group-level decisions from a p-value matrix CSV.
    Replay {
        matrix: PathBuf,
        #[arg(long, default_value = "decoding")]
        side: String,
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze {
            config,
            json,
            text,
            files,
        } => {
            let args = AnalyzeArgs {
                config,
                files,
                output_json: json,
                output_text: text,
            };
            commands::analyze(&args).map(|_| ())
        }
        Command::Simulate {
            fixture,
            subjects,
            samples,
            seed,
            out,
        } => {
            print!("{}", commands::simulate(&fixture, subjects, samples, seed, &out)?);
            Ok(())
        }
        Command::Dsep { dag, a, b, given } => {
            print!("{}", commands::dsep(&dag, &a, &b, &given)?);
            Ok(())
        }
        Command::Replay { matrix, side, config } => {
            let side: Side = side.parse()?;
            print!("{}", commands::replay(&matrix, side, config.as_deref())?.1);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(1)
        }
    }
}

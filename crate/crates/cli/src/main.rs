use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ionpa_cli::{load, prepare, run, RunOptions};

#[derive(Parser)]
#[command(name = "ionpa", version, about = "Trapped-ion SDF + parametric amplification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads for sweep points.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the Monte Carlo seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory the output path is resolved against.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config and every sweep point without computing.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, workers, seed, out } => run(
            &config,
            &RunOptions {
                workers,
                seed,
                out_dir: out,
            },
        )
        .map(|s| format!("wrote {} ({} points)", s.output.display(), s.points)),
        Command::Validate { config } => load(&config)
            .and_then(|cfg| prepare(&cfg))
            .map(|pts| format!("ok ({} points)", pts.len())),
    };
    match result {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

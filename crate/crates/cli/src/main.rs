use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use degreelab_cli::{execute, Command, EXIT_CONFIG};

/// Degree, stability, Green potential and ergodic reports for meromorphic
/// surface maps.
#[derive(Parser, Debug)]
#[command(name = "degreelab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("DEGREELAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                // Fails only if a pool already exists, which cannot happen here.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("DEGREELAB_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        }
    }
    ExitCode::from(execute(cli.command, &cli.config, &cli.out, cli.seed) as u8)
}

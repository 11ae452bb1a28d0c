use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use jetsigma::run::{run, Flags, COMMANDS};
use jetsigma::session::load_session_with;

/// σ-prolongations, σ-symmetry checks and reductions for session files.
#[derive(Parser, Debug)]
#[command(name = "jetsigma", version)]
struct Cli {
    /// One of prolong, bracket, involution, theorem2, check-symmetry, ibdp,
    /// reduce, equivalence, gauge, bridge, determining, oracle, all.
    command: String,
    #[arg(long)]
    session: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Sample points per zero test.
    #[arg(long, default_value_t = 20)]
    numeric_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the jet order of the session context.
    #[arg(long)]
    max_order: Option<usize>,
    /// Write the reduced session (reduce) or trajectory CSV (oracle) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat σ as the zero matrix.
    #[arg(long)]
    zero_sigma: bool,
}

const ERROR_EXIT: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !COMMANDS.contains(&cli.command.as_str()) {
        eprintln!("jetsigma: unknown command {} (expected one of {})", cli.command, COMMANDS.join(", "));
        return ExitCode::from(ERROR_EXIT);
    }
    let session = match load_session_with(&cli.session, cli.max_order) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("jetsigma: {}: {}", cli.session.display(), e);
            return ExitCode::from(ERROR_EXIT);
        }
    };
    let flags = Flags { numeric_trials: cli.numeric_trials, seed: cli.seed, zero_sigma: cli.zero_sigma };
    let report = match run(&cli.command, &session, &flags) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("jetsigma: {}", e);
            return ExitCode::from(ERROR_EXIT);
        }
    };
    if let Some(path) = &cli.out {
        let Some(artifact) = &report.artifact else {
            eprintln!("jetsigma: {} produces nothing for --out", cli.command);
            return ExitCode::from(ERROR_EXIT);
        };
        if let Err(e) = std::fs::write(path, artifact) {
            eprintln!("jetsigma: {}: {}", path.display(), e);
            return ExitCode::from(ERROR_EXIT);
        }
    }
    print!("{}", if cli.json { report.to_json() } else { report.to_text() });
    ExitCode::from(report.exit_code as u8)
}

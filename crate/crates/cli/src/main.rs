use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cat0_cli::{execute, load, Command, Overrides};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cat0", about = "Projection algorithms and inequality checks in CAT(0) spaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the algorithm named in the scenario's [run] section
    Run(Target),
    /// Certify the inequalities on the scenario's space and sets
    Certify(Target),
    /// Barycenter of the scenario's points
    Mean(Target),
    /// Print the version
    Version,
}

#[derive(Args)]
struct Target {
    file: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Residual tolerance
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, t) = match cli.command {
        Cmd::Version => {
            println!("cat0 {}", env!("CARGO_PKG_VERSION"));
            return ExitCode::SUCCESS;
        }
        Cmd::Run(t) => (Command::Run, t),
        Cmd::Certify(t) => (Command::Certify, t),
        Cmd::Mean(t) => (Command::Mean, t),
    };
    let overrides = Overrides { seed: t.seed, max_iter: t.max_iter, tol: t.tol };
    let base = t.file.parent().unwrap_or(Path::new("")).to_path_buf();
    match load(&t.file).and_then(|s| execute(&s, command, overrides, &base)) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

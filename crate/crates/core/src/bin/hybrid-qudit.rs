use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybrid_qudit::harness::{run, Command, Invocation};

#[derive(Parser)]
#[command(name = "hybrid-qudit", version, about = "Path/TE-mode hybrid qudit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate detector counts for a state and projector set
    Simulate(Common),
    /// Reconstruct a state by maximum likelihood, with a bootstrap error bar
    Tomo(Common),
    /// Coincidence and classical interference fringes
    Rhom(Common),
    /// Fidelity sweep over bit-flip probability with and without distillation
    Distill(Common),
    /// Entanglement entropy of a state
    Entropy(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set state.name=ghz4` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Tomo(c) => (Command::Tomo, c),
        Cmd::Rhom(c) => (Command::Rhom, c),
        Cmd::Distill(c) => (Command::Distill, c),
        Cmd::Entropy(c) => (Command::Entropy, c),
    };
    let inv = Invocation { config: common.config, overrides: common.overrides, seed: common.seed, out: common.out };
    match run(command, &inv) {
        Ok(report) => {
            for line in report.summary {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

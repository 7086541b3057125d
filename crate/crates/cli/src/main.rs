mod commands;
mod config;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Failure;

#[derive(Parser)]
#[command(name = "chainswap", version, about = "Entanglement transport on a dipolar spin chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled configuration.
    #[arg(long, global = true)]
    preset: Option<Preset>,
    /// Sweep worker threads (default: config, then available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (default: config, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Fig2,
    Fig3,
}

#[derive(Subcommand)]
enum Command {
    /// Run the transport protocol once and write trajectory and report.
    Simulate,
    /// Check the SWAP program against the ideal gate.
    GateCheck {
        /// Check this program (JSON) instead of the built-in sequence.
        #[arg(long)]
        program: Option<PathBuf>,
    },
    /// Evaluate the configured grid.
    Sweep,
    /// Parse and validate the configuration only.
    Validate,
}

fn load(cli: &Cli) -> Result<config::ResolvedConfig, Failure> {
    let text = match (&cli.config, cli.preset) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?,
        (None, Some(Preset::Fig2)) => config::FIG2.to_string(),
        (None, Some(Preset::Fig3)) => config::FIG3.to_string(),
        (None, None) => return Err(Failure::Config("one of --config or --preset is required".into())),
    };
    config::parse(&text).map_err(Failure::Config)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let out = cli.out.clone().or_else(|| cfg.output_dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    match &cli.command {
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::GateCheck { program } => commands::gate(&cfg, program.as_deref(), &out),
        Command::Sweep => {
            let workers = cli
                .workers
                .or(cfg.workers)
                .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
            if workers == 0 {
                return Err(Failure::Config("--workers: must be at least 1".into()));
            }
            commands::sweep(&cfg, workers, &out)
        }
        Command::Validate => commands::validate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let kind = match f {
                Failure::Config(_) => "config error",
                Failure::Physics(_) => "check failed",
                Failure::Runtime(_) => "error",
            };
            eprintln!("{kind}: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use hermite_lab::config::{Format, LabConfig, Settings};
use hermite_lab::error::EXIT_CONFIG;
use hermite_lab::output::write_report;
use hermite_lab::{run, Command, LabError};

/// Config-driven runner for the Hermite-operator experiments.
#[derive(Debug, Parser)]
#[command(name = "hermite-lab", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// TOML file with top-level settings and one section per subcommand
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Base seed for every random draw
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory receiving the table and the summary
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Worker threads (overrides HERMITE_LAB_WORKERS)
    #[arg(long, global = true)]
    workers: Option<usize>,
}

fn execute(cli: Cli) -> Result<(), LabError> {
    let file = match &cli.config {
        Some(path) => LabConfig::load(path)?,
        None => LabConfig::default(),
    };
    let Some(command) = cli.command.or(file.command) else {
        let _ = Cli::command().print_help();
        return Err(LabError::Config("no subcommand given".into()));
    };
    let settings = Settings::resolve(&file, cli.seed, cli.output, cli.format, cli.workers)?;
    eprintln!(
        "[{}] seed {} with {} worker(s)",
        command.name(),
        settings.seed,
        settings.workers
    );
    let report = run(command, &file, &settings)?;
    let artifacts = write_report(&report, &settings.output, settings.format)?;
    for check in &report.checks {
        println!("{}", check.line());
    }
    eprintln!(
        "[{}] wrote {} and {}",
        command.name(),
        artifacts.table.display(),
        artifacts.summary.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            ExitCode::from(u8::try_from(code).unwrap_or(EXIT_CONFIG as u8))
        }
    }
}

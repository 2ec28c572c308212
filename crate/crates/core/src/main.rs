use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use gsip::cli::{self, CliError, Command};

/// Build and verify exactly solvable position-dependent-mass problems.
#[derive(Debug, Parser)]
#[command(name = "gsip", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// TOML config file.
    config: PathBuf,

    /// Output directory (overrides `run.out`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override a config value, e.g. `--set family.a=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run(args: &Args) -> Result<u8, CliError> {
    let text = fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let config = cli::parse_config(&text, &args.overrides)?;
    let outcome = cli::execute(&config, args.command, args.out.as_deref())?;
    print!("{}", outcome.stdout);
    for path in &outcome.written {
        eprintln!("wrote {}", path.display());
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

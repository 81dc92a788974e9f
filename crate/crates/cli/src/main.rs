use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfi_cli::config::ProtocolConfig;
use qfi_cli::{runner, validate, CliError};

#[derive(Parser)]
#[command(name = "qfi", version, about = "Quantum Fisher information of spin blocks after kicks and quenches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol config and write one CSV per source.
    Run { config: PathBuf },
    /// Run a config for each value of one parameter and merge the CSVs.
    Sweep {
        config: PathBuf,
        /// Parameter name (h, h0, r, period, spacing, gamma) or dotted config path.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
    /// Compare the Gaussian path with exact diagonalization.
    Validate {
        #[arg(long)]
        quick: bool,
    },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ProtocolConfig::from_json(&read(&config)?)?;
            for p in runner::run(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::Sweep { config, axis, mut values } => {
            values.retain(|v| !v.trim().is_empty());
            let text = read(&config)?;
            let doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
            for p in runner::sweep(&doc, &axis, &values)? {
                println!("{}", p.display());
            }
        }
        Command::Validate { quick } => {
            let d = validate::oracle_suite(quick)?;
            println!("states compared: {}", d.states);
            println!("max |Δ variance|   = {:.3e} (tol {:.0e})", d.variance, validate::WYDI_TOL);
            println!("max |Δ I_α|        = {:.3e} (tol {:.0e})", d.wydi, validate::WYDI_TOL);
            println!("max relative Δ F/4 = {:.3e} (tol {:.0e})", d.qfi_relative, validate::QFI_REL_TOL);
            if !d.passed() {
                return Err(CliError::Numerical(qfi_core::Error::Format("oracle deviations above tolerance".into())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = std::env::var("QFI_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("QFI_THREADS ignored: {e}");
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

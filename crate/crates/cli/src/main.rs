use clap::Parser;
use sqrtsieve_cli::config::{self, Command, Format, Overrides};
use sqrtsieve_cli::{run, RunError, EXIT_CHECK_FAILED};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Verification sweeps for modular square roots, Gauss sums, bilinear sums
/// and the square-moduli large sieve.
#[derive(Parser, Debug)]
#[command(name = "sqrtsieve", version)]
struct Args {
    /// Sweep to run; may instead be given as `command` in the config file.
    command: Option<Command>,
    /// TOML file with run settings and a `[grid]` table.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; the report goes to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: Args) -> Result<bool, RunError> {
    let ov = Overrides {
        command: args.command,
        seed: args.seed,
        out: args.out,
        format: args.format,
        threads: args.threads,
    };
    let cfg = match &args.config {
        Some(path) => config::load(path, ov)?,
        None => config::resolve(None, ov).map_err(RunError::Config)?,
    };
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Io(format!("thread pool: {e}")))?;
    }
    let report = run(&cfg)?;
    let text = report.render(cfg.format);
    match &cfg.output_path {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
            println!("{}", report.summary_line());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| RunError::Io(format!("stdout: {e}")))?;
            eprintln!("{}", report.summary_line());
        }
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED as u8),
        Err(e) => {
            eprintln!("sqrtsieve: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

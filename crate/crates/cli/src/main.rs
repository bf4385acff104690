use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use slipstab_cli::commands::{self, Failure};
use slipstab_cli::config::{resolve, InputError, Opts};

#[derive(Parser)]
#[command(name = "slipstab", version, about = "Stability of steady frictional sliding between dissimilar solids")]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Effective shear modulus and characteristic speed of each solid
    Medium(Opts),
    /// Critical neutral mode, or `always-stable`
    Kcr(Opts),
    /// Neutral modes over a q grid as CSV
    Sweep(Opts),
    /// fig1.csv ... fig8.csv for the four bi-material presets
    Figures(Opts),
    /// Count and locate unstable roots at one wavenumber
    Roots(Opts),
    /// Spring-block trajectory as CSV
    Simulate(Opts),
    /// Run the verification suite
    Verify(Opts),
}

fn threads() -> Result<(), InputError> {
    let Ok(raw) = std::env::var("SLIPSTAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| InputError::new("SLIPSTAB_THREADS", format!("expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| InputError::new("SLIPSTAB_THREADS", e.to_string()))
}

fn run(mode: Mode) -> Result<(), Failure> {
    threads()?;
    let (run, opts): (fn(&Opts) -> commands::Outcome, Opts) = match mode {
        Mode::Medium(o) => (commands::medium, o),
        Mode::Kcr(o) => (commands::kcr, o),
        Mode::Sweep(o) => (commands::sweep, o),
        Mode::Figures(o) => (commands::figures, o),
        Mode::Roots(o) => (commands::roots, o),
        Mode::Simulate(o) => (commands::simulate, o),
        Mode::Verify(o) => (commands::verify_all, o),
    };
    run(&resolve(opts)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(2);
        }
    };
    match run(cli.mode) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("input error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
    }
}

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use super::config::{ExperimentKind, keys_help, parse_config};
use super::results::{ResultBundle, write_results};
use super::run::{self, is_blow_up};
use super::verify::verify_suite;
use crate::experiments::{AREA_MARGIN, area_trend_holds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  a verification check failed
  2  usage, configuration or I/O error
  3  numerical blow-up (non-finite or degenerate state)";

fn long_help() -> String {
    format!("{}\n{EXIT_CODES}", keys_help())
}

#[derive(Debug, Parser)]
#[command(
    name = "llstab",
    version,
    about = "Controlled Landau-Lifshitz nanowire: stabilization, hysteresis and certificates",
    after_long_help = long_help()
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key = value configuration file (all keys optional)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// output directory for summary and CSV files
    #[arg(long, global = true, default_value = "llstab-out")]
    out: PathBuf,

    /// comma-separated frequencies, overriding hysteresis.omegas
    #[arg(long, global = true, value_delimiter = ',')]
    omega: Option<Vec<f64>>,

    /// accepted for compatibility; every run is already deterministic
    #[arg(long, global = true)]
    seedless: bool,

    /// suppress progress and summary output
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Closed-loop stabilization run with the Lyapunov decay certificate
    Simulate,
    /// Periodic-input runs for the configured component and frequencies
    Hysteresis,
    /// Lemma and invariant certificate suite
    Verify,
    /// Hysteresis runs for all three axis configurations
    Sweep,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Simulate => ExperimentKind::Stabilize,
            Command::Hysteresis => ExperimentKind::Hysteresis,
            Command::Verify => ExperimentKind::Verify,
            Command::Sweep => ExperimentKind::Sweep,
        }
    }
}

fn report_bundle(bundle: &ResultBundle, out: &mut dyn Write) -> std::io::Result<()> {
    if let Some(s) = &bundle.stabilization {
        writeln!(out, "converged: {}", s.converged)?;
        match s.t_converge {
            Some(t) => writeln!(out, "t_converge: {t}")?,
            None => writeln!(out, "t_converge: none")?,
        }
        writeln!(out, "violations: {}", s.violations)?;
        writeln!(out, "max norm deviation: {:e}", s.max_norm_deviation)?;
        if let (Some(a), Some(b)) = (bundle.trajectory.first(), bundle.trajectory.last()) {
            writeln!(out, "V: {:e} -> {:e}", a.v, b.v)?;
            writeln!(out, "||m - r||: {:e} -> {:e}", a.err_norm, b.err_norm)?;
        }
    }
    if !bundle.hysteresis.is_empty() {
        writeln!(out, "component  omega        loop_area              closed")?;
        for r in &bundle.hysteresis {
            writeln!(
                out,
                "{:<10} {:<12} {:<22e} {}",
                r.component, r.omega, r.loop_area, r.closed
            )?;
        }
        for c in 1..=3 {
            let runs: Vec<_> = bundle
                .hysteresis
                .iter()
                .filter(|r| r.component == c)
                .cloned()
                .collect();
            if runs.len() > 1 {
                let trend = area_trend_holds(&runs, AREA_MARGIN);
                writeln!(
                    out,
                    "m{c}: areas increase as omega decreases: {}",
                    if trend { "yes" } else { "no" }
                )?;
            }
        }
    }
    Ok(())
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let (sink, code): (&mut dyn Write, i32) = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (out, EXIT_OK),
                _ => (err, EXIT_USAGE),
            };
            let _ = write!(sink, "{}", e.render().ansi());
            return code;
        }
    };

    let text = match &cli.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(err, "error: cannot read config {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        None => String::new(),
    };
    let parsed = match parse_config(&text) {
        Ok(p) => p,
        Err(e) => {
            let origin = cli
                .config
                .as_ref()
                .map_or("<defaults>".into(), |p| p.display().to_string());
            let _ = writeln!(err, "error: {origin}: {e}");
            return EXIT_USAGE;
        }
    };
    if !cli.quiet {
        for w in &parsed.warnings {
            let _ = writeln!(err, "warning: {w}");
        }
    }
    let mut config = parsed.config;
    config.experiment = cli.command.kind();
    if let Some(omegas) = cli.omega {
        if omegas.is_empty() || omegas.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            let _ = writeln!(err, "error: --omega needs positive finite frequencies");
            return EXIT_USAGE;
        }
        config.omegas = omegas;
    }

    let result = match cli.command {
        Command::Verify => {
            return match verify_suite(&config) {
                Ok(report) => {
                    if !cli.quiet {
                        let _ = write!(out, "{report}");
                    }
                    if report.passed() {
                        EXIT_OK
                    } else {
                        EXIT_VERIFY_FAILED
                    }
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    if is_blow_up(&e) {
                        EXIT_BLOW_UP
                    } else {
                        EXIT_USAGE
                    }
                }
            };
        }
        Command::Simulate => run::stabilize(&config),
        Command::Hysteresis => run::hysteresis(&config),
        Command::Sweep => run::sweep(&config),
    };
    let bundle = match result {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return if is_blow_up(&e) {
                EXIT_BLOW_UP
            } else {
                EXIT_USAGE
            };
        }
    };
    match write_results(&bundle, &cli.out) {
        Ok(files) => {
            if !cli.quiet {
                let _ = report_bundle(&bundle, out);
                let _ = writeln!(out, "wrote {} files to {}", files.len(), cli.out.display());
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

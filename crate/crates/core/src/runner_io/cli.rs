//! `mhde` command line. Exit codes: 0 success, 1 runtime failure or failed
//! hypothesis, 2 usage error.

use super::config::{parse_coefficients, parse_config, RunConfig};
use super::run::{diagnose, execute_converge, execute_run, CONFIG_FILE, DIAGNOSE_FILE};
use super::{io_context, Result, RunnerError};
use crate::constitutive::{validate_hypotheses, SampleSpec};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "mhde", version, about = "Compressible heat-conducting MHD solver and identity diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a coefficient set against every structural hypothesis.
    ValidateCoeffs(ValidateArgs),
    /// Integrate a run and write time series, snapshots and a manifest.
    Run(RunArgs),
    /// Recompute the time series of a finished run from its snapshots.
    Diagnose(DiagnoseArgs),
    /// Run a mollified sequence and report convergence proxies.
    Converge(ConvergeArgs),
}

#[derive(Args, Debug)]
struct ConfigArg {
    /// Configuration file.
    #[arg(value_name = "CONFIG")]
    positional: Option<PathBuf>,
    /// Configuration file (alternative to the positional argument).
    #[arg(long, value_name = "PATH", conflicts_with = "positional")]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn path(&self) -> Option<&Path> {
        self.config.as_deref().or(self.positional.as_deref())
    }
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Log-spaced samples per axis.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; affects speed only.
    #[arg(long)]
    threads: Option<usize>,
    /// Start from this snapshot instead of the configured initial data.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    /// Directory of a completed run.
    #[arg(value_name = "RUN_DIR")]
    run_dir: PathBuf,
    /// Configuration file (default: the copy stored in the run directory).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for `diagnose.csv` (default: the run directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

enum Outcome {
    Ok,
    Failed,
}

fn read_text(path: &Path) -> Result<String> {
    io_context(std::fs::read_to_string(path), || format!("reading {}", path.display()))
}

fn load(arg: &ConfigArg) -> Result<RunConfig> {
    let path = arg.path().ok_or_else(|| RunnerError::Usage("a configuration file is required".into()))?;
    Ok(parse_config(&read_text(path)?)?)
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(RunnerError::Usage("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunnerError::Failed(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::ValidateCoeffs(a) => {
            let path = a.config.path().ok_or_else(|| RunnerError::Usage("a configuration file is required".into()))?;
            let coeffs = parse_coefficients(&read_text(path)?)?;
            let spec = SampleSpec { n_samples: a.samples, ..SampleSpec::default() };
            let report = validate_hypotheses(&coeffs, &spec).map_err(|e| RunnerError::Usage(e.to_string()))?;
            print!("{}", report.to_table());
            Ok(if report.all_pass() { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Run(a) => {
            let config = load(&a.config)?;
            let out = a.out.unwrap_or_else(|| config.output_dir.clone());
            let outcome = with_threads(a.threads, || execute_run(&config, &out, a.resume.as_deref()))??;
            println!(
                "run finished: {} outputs, {} steps, written to {}",
                outcome.records.len(),
                outcome.manifest.steps,
                out.display()
            );
            Ok(Outcome::Ok)
        }
        Command::Diagnose(a) => {
            let cfg_path = a.config.unwrap_or_else(|| a.run_dir.join(CONFIG_FILE));
            let config = parse_config(&read_text(&cfg_path)?)?;
            let out_dir = a.out.unwrap_or_else(|| a.run_dir.clone());
            io_context(std::fs::create_dir_all(&out_dir), || format!("creating {}", out_dir.display()))?;
            let csv = out_dir.join(DIAGNOSE_FILE);
            let records = with_threads(a.threads, || diagnose(&config, &a.run_dir, &csv))??;
            println!("diagnosed {} snapshots into {}", records.len(), csv.display());
            Ok(Outcome::Ok)
        }
        Command::Converge(a) => {
            let config = load(&a.config)?;
            let out = a.out.unwrap_or_else(|| config.output_dir.clone());
            let report = with_threads(a.threads, || execute_converge(&config, &out))??;
            print!("{}", report.verdict_block());
            Ok(Outcome::Ok)
        }
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(argv) {
        Ok(p) => p,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(parsed.command) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Err(RunnerError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_flags_exit_with_usage_code() {
        assert_eq!(cli(["mhde", "run", "--bogus"]), 2);
        assert_eq!(cli(["mhde", "frobnicate"]), 2);
        assert_eq!(cli(["mhde"]), 2);
        assert_eq!(cli(["mhde", "run"]), 2);
        assert_eq!(cli(["mhde", "run", "--help"]), 0);
    }

    #[test]
    fn validate_coeffs_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.cfg");
        std::fs::write(&good, "coefficients.preset = reference\n").unwrap();
        let bad = dir.path().join("bad.cfg");
        std::fs::write(&bad, "coefficients.preset = reference\ncoefficients.beta = 0.5\n").unwrap();
        assert_eq!(cli(["mhde".as_ref(), "validate-coeffs".as_ref(), good.as_os_str()]), 0);
        assert_eq!(cli(["mhde".as_ref(), "validate-coeffs".as_ref(), bad.as_os_str()]), 1);
        assert_eq!(cli(["mhde".as_ref(), "validate-coeffs".as_ref(), dir.path().join("none").as_os_str()]), 1);
    }
}

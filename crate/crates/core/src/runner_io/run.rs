//! The `run`, `diagnose` and `converge` drivers.
//!
//! At every output time the run records diagnostics of the current state,
//! using one trial step from that state as the residual window, and writes
//! a snapshot. Each record depends only on its snapshot and the config, so
//! `diagnose` can recompute the time series exactly.

use super::config::{InitialData, RunConfig};
use super::manifest::RunManifest;
use super::snapshot::{read_snapshot_on, write_snapshot};
use super::timeseries::TimeseriesWriter;
use super::{io_context, Result, RunnerError};
use crate::convergence_lab::{run_sequence, ConvergenceReport, SequenceSpec};
use crate::diagnostics::{DiagnosticRecord, RecordOptions, StepWindow};
use crate::dynamics::Dynamics;
use crate::field_state::FieldState;
use std::path::{Path, PathBuf};

pub const CONFIG_FILE: &str = "config.cfg";
pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const DIAGNOSE_FILE: &str = "diagnose.csv";

pub fn snapshot_name(index: usize) -> String {
    format!("snap_{index:05}.mhde")
}

pub fn initial_state(config: &RunConfig) -> Result<FieldState> {
    match &config.initial {
        InitialData::Profile(p) => Ok(p.sample(&config.grid)),
        InitialData::Snapshot(path) => Ok(read_snapshot_on(path, &config.grid)?),
    }
}

fn dynamics(config: &RunConfig) -> Dynamics {
    Dynamics::new(&config.grid, config.backend, config.coeffs, config.physics, config.floors)
}

fn step_size(config: &RunConfig, dyn_: &Dynamics, state: &FieldState) -> Result<f64> {
    Ok(match config.dt {
        Some(dt) => dt,
        None => dyn_.stable_dt(state, config.cfl)?,
    })
}

fn record(config: &RunConfig, dyn_: &Dynamics, state: &FieldState) -> Result<DiagnosticRecord> {
    let dt = step_size(config, dyn_, state)?;
    let trial = dyn_.step(state, dt)?;
    let window = StepWindow::new(state, &trial);
    Ok(DiagnosticRecord::compute(dyn_, state, Some(&window), &RecordOptions { floors: config.floors })?)
}

/// Steps from `state` to exactly `target`.
fn advance(config: &RunConfig, dyn_: &Dynamics, state: FieldState, target: f64) -> Result<(FieldState, u64, u64)> {
    let mut s = state;
    let (mut steps, mut floored) = (0u64, 0u64);
    let tol = 1e-12 * target.abs().max(1.0);
    while target - s.time > tol {
        let dt = step_size(config, dyn_, &s)?.min(target - s.time);
        let out = dyn_.step(&s, dt)?;
        steps += 1;
        floored += out.flooring_events as u64;
        s = out.state;
    }
    s.time = target;
    Ok((s, steps, floored))
}

pub struct RunOutcome {
    pub records: Vec<DiagnosticRecord>,
    pub manifest: RunManifest,
}

fn create_dir(dir: &Path) -> Result<()> {
    io_context(std::fs::create_dir_all(dir), || format!("creating {}", dir.display()))
}

/// Output times from `t0` to `t_final`; `t0` itself is always included.
fn output_times(config: &RunConfig, t0: f64) -> Vec<f64> {
    let tol = 1e-9 * config.output_interval;
    let mut times = vec![t0];
    for k in 1..=config.output_count() {
        let t = if k == config.output_count() { config.t_final } else { k as f64 * config.output_interval };
        if t > t0 + tol {
            times.push(t);
        }
    }
    times
}

/// Integrates per `config`, writing the config copy, time series, snapshots
/// and manifest into `out_dir`. The manifest is written on failure too.
pub fn execute_run(config: &RunConfig, out_dir: &Path, resume: Option<&Path>) -> Result<RunOutcome> {
    create_dir(out_dir)?;
    let mut manifest = RunManifest::start("run", config.config_hash());
    let mut records = Vec::new();
    let result = run_loop(config, out_dir, resume, &mut manifest, &mut records);
    manifest.final_record = records.last().cloned();
    manifest.finish(result.as_ref().err().map(ToString::to_string));
    manifest.write(out_dir)?;
    manifest.files.push("manifest.json".into());
    result.map(|()| RunOutcome { records, manifest })
}

fn run_loop(
    config: &RunConfig,
    out_dir: &Path,
    resume: Option<&Path>,
    manifest: &mut RunManifest,
    records: &mut Vec<DiagnosticRecord>,
) -> Result<()> {
    let cfg_path = out_dir.join(CONFIG_FILE);
    io_context(std::fs::write(&cfg_path, config.to_text()), || format!("writing {}", cfg_path.display()))?;
    manifest.files.push(CONFIG_FILE.into());
    let dyn_ = dynamics(config);
    let mut state = match resume {
        Some(path) => read_snapshot_on(path, &config.grid)?,
        None => initial_state(config)?,
    };
    if !(state.time < config.t_final) {
        return Err(RunnerError::Usage(format!("start time {} is not before t_final {}", state.time, config.t_final)));
    }
    let mut writer = TimeseriesWriter::create(&out_dir.join(TIMESERIES_FILE))?;
    manifest.files.push(TIMESERIES_FILE.into());
    for (k, &t) in output_times(config, state.time).iter().enumerate() {
        if k > 0 {
            let (next, steps, floored) = advance(config, &dyn_, state, t)?;
            state = next;
            manifest.steps += steps;
            manifest.flooring_total += floored;
        }
        let name = snapshot_name(k);
        write_snapshot(&state, &out_dir.join(&name))?;
        manifest.files.push(name);
        let rec = record(config, &dyn_, &state)?;
        writer.append(&rec)?;
        records.push(rec);
    }
    Ok(())
}

fn snapshot_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = io_context(std::fs::read_dir(dir), || format!("listing {}", dir.display()))?;
    let mut paths = Vec::new();
    for e in entries {
        let p = io_context(e, || format!("listing {}", dir.display()))?.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with("snap_") && name.ends_with(".mhde") {
            paths.push(p);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Recomputes the time series of a completed run from its snapshots and
/// writes it to `out_csv`.
pub fn diagnose(config: &RunConfig, run_dir: &Path, out_csv: &Path) -> Result<Vec<DiagnosticRecord>> {
    let paths = snapshot_paths(run_dir)?;
    if paths.is_empty() {
        return Err(RunnerError::Usage(format!("no snapshots in {}", run_dir.display())));
    }
    let dyn_ = dynamics(config);
    let mut writer = TimeseriesWriter::create(out_csv)?;
    let mut records = Vec::with_capacity(paths.len());
    for p in paths {
        let state = read_snapshot_on(&p, &config.grid)?;
        let rec = record(config, &dyn_, &state)?;
        writer.append(&rec)?;
        records.push(rec);
    }
    Ok(records)
}

pub fn sequence_spec(config: &RunConfig) -> Result<SequenceSpec> {
    let cv = &config.converge;
    Ok(SequenceSpec {
        base: initial_state(config)?,
        eps0: cv.eps0,
        members: cv.members,
        backend: config.backend,
        coeffs: config.coeffs,
        physics: config.physics,
        floors: config.floors,
        t_final: cv.t_final,
        outputs: cv.outputs,
        cfl: config.cfl,
        max_floor_fraction: cv.max_floor_fraction,
        h_bound: cv.h_bound,
    })
}

/// Runs the convergence lab and writes `convergence.csv`, `verdict.txt`
/// and the manifest. A partial report is written and then returned as an
/// error.
pub fn execute_converge(config: &RunConfig, out_dir: &Path) -> Result<ConvergenceReport> {
    create_dir(out_dir)?;
    let mut manifest = RunManifest::start("converge", config.config_hash());
    let result = (|| {
        let report = run_sequence(&sequence_spec(config)?)?;
        for (name, text) in [("convergence.csv", report.to_csv()), ("verdict.txt", report.verdict_block())] {
            let path = out_dir.join(name);
            io_context(std::fs::write(&path, text), || format!("writing {}", path.display()))?;
            manifest.files.push(name.into());
        }
        manifest.steps = report.members.iter().map(|m| m.steps).sum();
        manifest.flooring_total = report.members.iter().map(|m| m.flooring_events).sum();
        Ok::<_, RunnerError>(report)
    })();
    let failure = match &result {
        Ok(r) if r.is_partial() => Some("one or more sequence members failed".to_string()),
        Ok(_) => None,
        Err(e) => Some(e.to_string()),
    };
    manifest.finish(failure.clone());
    manifest.write(out_dir)?;
    match (result, failure) {
        (Ok(report), None) => Ok(report),
        (Ok(_), Some(f)) => Err(RunnerError::Failed(f)),
        (Err(e), _) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner_io::{parse_config, read_timeseries};

    fn config(extra: &str) -> RunConfig {
        parse_config(&format!(
            "grid.d = 1\ngrid.dims = 16\ncoefficients.preset = reference\nrun.t_final = 0.04\nrun.output_interval = 0.02\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn constant_run_has_vanishing_residuals() {
        let c = config("initial.profile = constant\ninitial.rho = 1.2\ninitial.u = 0.1, -0.2, 0.3\ninitial.h = 0.3, 0.1, 0\n");
        let dir = tempfile::tempdir().unwrap();
        let out = execute_run(&c, dir.path(), None).unwrap();
        assert_eq!(out.records.len(), 3);
        for r in &out.records {
            for v in [r.res22_eq22, r.res23_eq23, r.res13_eq13, r.res29_eq29, r.res_rho_log_rho_eq11] {
                assert!(v.abs() <= 1e-10, "{r:?}");
            }
        }
        assert_eq!(out.manifest.status, "ok");
        assert!(dir.path().join("manifest.json").exists());
        assert_eq!(out.records.last().unwrap().time, 0.04);
    }

    #[test]
    fn diagnose_reproduces_the_run_csv() {
        let c = config("initial.profile = manufactured\n");
        let dir = tempfile::tempdir().unwrap();
        execute_run(&c, dir.path(), None).unwrap();
        let csv = dir.path().join(DIAGNOSE_FILE);
        diagnose(&c, dir.path(), &csv).unwrap();
        let a = std::fs::read(dir.path().join(TIMESERIES_FILE)).unwrap();
        let b = std::fs::read(&csv).unwrap();
        assert_eq!(a, b);
        assert_eq!(read_timeseries(&csv).unwrap().len(), 3);
    }

    #[test]
    fn resume_continues_from_a_snapshot() {
        let c = config("initial.profile = manufactured\n");
        let dir = tempfile::tempdir().unwrap();
        let full = execute_run(&c, &dir.path().join("full"), None).unwrap();
        let snap = dir.path().join("full").join(snapshot_name(1));
        let resumed = execute_run(&c, &dir.path().join("resumed"), Some(&snap)).unwrap();
        assert_eq!(resumed.records.len(), 2);
        assert_eq!(resumed.records[0], full.records[1]);
    }

    #[test]
    fn failure_still_writes_a_manifest() {
        let c = config("initial.profile = manufactured\nrun.dt = 5\n");
        let dir = tempfile::tempdir().unwrap();
        assert!(execute_run(&c, dir.path(), None).is_err());
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert!(text.contains("\"status\": \"failed\""), "{text}");
    }
}

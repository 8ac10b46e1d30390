use std::path::Path;
use std::process::{Command, Output};

fn mhde(args: &[&std::ffi::OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhde")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_coeffs_reports_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.cfg", "coefficients.preset = reference\n");
    let out = mhde(&["validate-coeffs".as_ref(), good.as_os_str()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!out.stdout.is_empty());
    let bad = write(dir.path(), "bad.cfg", "coefficients.preset = reference\ncoefficients.stiff_exponent = 8\n");
    assert_eq!(mhde(&["validate-coeffs".as_ref(), bad.as_os_str()]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mhde(&["run".as_ref(), "--no-such-flag".as_ref()]).status.code(), Some(2));
    assert_eq!(mhde(&[]).status.code(), Some(2));
}

#[test]
fn run_then_diagnose_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "smoke.cfg",
        "grid.d = 1\ngrid.dims = 16\ncoefficients.preset = reference\ninitial.profile = constant\nrun.t_final = 0.1\nrun.output_interval = 0.05\n",
    );
    let out_dir = dir.path().join("out");
    let run = mhde(&["run".as_ref(), cfg.as_os_str(), "--out".as_ref(), out_dir.as_os_str()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    for f in ["config.cfg", "timeseries.csv", "manifest.json", "snap_00000.mhde", "snap_00002.mhde"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let diag = mhde(&["diagnose".as_ref(), out_dir.as_os_str()]);
    assert_eq!(diag.status.code(), Some(0));
    assert_eq!(std::fs::read(out_dir.join("timeseries.csv")).unwrap(), std::fs::read(out_dir.join("diagnose.csv")).unwrap());
}

#[test]
fn failing_run_exits_one_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "blowup.cfg",
        "grid.d = 1\ngrid.dims = 16\ncoefficients.preset = reference\ninitial.profile = manufactured\nrun.t_final = 10\nrun.output_interval = 5\nrun.dt = 5\n",
    );
    let out_dir = dir.path().join("out");
    let run = mhde(&["run".as_ref(), cfg.as_os_str(), "--out".as_ref(), out_dir.as_os_str()]);
    assert_eq!(run.status.code(), Some(1));
    assert!(std::fs::read_to_string(out_dir.join("manifest.json")).unwrap().contains("failed"));
}

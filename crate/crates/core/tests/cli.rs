//! End-to-end runs of the `hopf-crf` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hopf_crf::commands::{
    EXIT_CONFIG, EXIT_INADMISSIBLE, EXIT_OK, EXIT_POSITIVITY, EXIT_VERIFY_FAILED, STATIC_HEADER, SWEEP_HEADER,
};
use hopf_crf::diagnostics::MonitorRecord;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopf-crf"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("HOPF_CRF_N_U")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn small_flow<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["flow", "--set", "n_u=16", "--set", "n_sigma=16", "--set", "t_max=0.1"];
    v.extend_from_slice(extra);
    v
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn verify_passes_and_unsquared_variant_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["verify", "--preset", "asym", "--set", "samples=100", "--set", "fd_samples=10"], dir.path());
    assert_eq!(code(&ok), EXIT_OK, "{}", String::from_utf8_lossy(&ok.stdout));
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.starts_with("name,samples,max_residual,tolerance,pass,expected\n"));
    assert!(dir.path().join("verify_summary.txt").exists());

    let bad = run(
        &[
            "verify",
            "--preset",
            "asym",
            "--set",
            "samples=100",
            "--set",
            "fd_samples=10",
            "--set",
            "hessian_variant=unsquared",
        ],
        dir.path(),
    );
    assert_eq!(code(&bad), EXIT_VERIFY_FAILED);
}

#[test]
fn round_flow_follows_the_volume_law() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&small_flow(&["--preset", "round"]), dir.path());
    assert_eq!(code(&o), EXIT_OK);
    let text = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), MonitorRecord::HEADER.join(","));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 11);
    let v0 = rows[0][1];
    for r in &rows {
        assert!((r[1] / v0 - (1.0 - 2.0 * r[0])).abs() < 0.01);
        assert!((r[2] / v0 - (1.0 - 2.0 * r[0])).abs() < 1e-12);
    }
    let m = manifest(dir.path());
    for key in ["config", "version", "started_at", "wall_seconds", "termination"] {
        assert!(m.get(key).is_some(), "{key}");
    }
    assert_eq!(m["termination"]["reason"], "completed");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args =
        small_flow(&["--preset", "asym", "--set", "initial=cos-bump", "--set", "epsilon=0.01", "--set", "threads=1"]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run(&args, &a)), EXIT_OK);
    assert_eq!(code(&run(&args, &b)), EXIT_OK);
    assert_eq!(fs::read(a.join("timeseries.csv")).unwrap(), fs::read(b.join("timeseries.csv")).unwrap());
}

#[test]
fn large_bump_is_inadmissible() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&small_flow(&["--preset", "asym", "--set", "initial=cos-bump", "--set", "epsilon=1000"]), dir.path());
    assert_eq!(code(&o), EXIT_INADMISSIBLE);
    assert_eq!(manifest(dir.path())["termination"]["reason"], "inadmissible_initial_data");
}

#[test]
fn positivity_failure_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["flow", "--preset", "asym", "--set", "n_u=16", "--set", "n_sigma=16", "--set", "t_max=0.45"]
            .into_iter()
            .chain(["--set", "cfl=50", "--set", "max_retries=0", "--set", "monitor_cadence=0.45"])
            .collect::<Vec<_>>(),
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_POSITIVITY);
    assert_eq!(manifest(dir.path())["termination"]["reason"], "positivity_failure");
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["flow", "--set", "n_u=16"], dir.path())), EXIT_CONFIG);
    assert_eq!(code(&run(&small_flow(&["--preset", "asym", "--set", "t_max=0.6"]), dir.path())), EXIT_CONFIG);
    assert_eq!(code(&run(&small_flow(&["--preset", "asym", "--set", "no_such_key=1"]), dir.path())), EXIT_CONFIG);
}

#[test]
fn config_file_and_environment_layering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# asym preset by hand\nabs_alpha = 2\nabs_beta = 4\nn_u = 12\nn_sigma = 8\nt_max = 0.02\n")
        .unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_hopf-crf"))
        .args(["flow", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("HOPF_CRF_N_U", "10")
        .output()
        .unwrap();
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["config"]["n_u"], 10);
    assert_eq!(m["config"]["n_sigma"], 8);
}

#[test]
fn snapshot_restarts_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = run(&small_flow(&["--preset", "asym", "--set", "snapshot_times=0.05"]), &first);
    assert_eq!(code(&o), EXIT_OK);
    let snap = first.join("snapshots").join("phi_t0.05.json");
    assert!(snap.exists());
    let second = dir.path().join("second");
    let set = format!("initial_path={}", snap.display());
    let o = run(&small_flow(&["--preset", "asym", "--set", "initial=file", "--set", &set]), &second);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));

    // a snapshot from another grid is refused
    let third = dir.path().join("third");
    let o = run(&small_flow(&["--preset", "asym", "--set", "initial=file", "--set", &set, "--set", "n_u=32"]), &third);
    assert_ne!(code(&o), EXIT_OK);
}

#[test]
fn static_table_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["static", "--preset", "asym", "--set", "static_n_u=8", "--set", "static_n_sigma=9"], dir.path());
    assert_eq!(code(&o), EXIT_OK);
    let text = fs::read_to_string(dir.path().join("static.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), STATIC_HEADER);
    assert_eq!(lines.count(), 72);
}

#[test]
fn sweep_writes_the_upper_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["sweep", "--set", "sweep_values=1.5,2,3", "--set", "n_u=8", "--set", "n_sigma=8", "--set", "t_max=0.05"],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("1.5,1.5,"));
    assert!(rows.iter().all(|r| r.ends_with(",0")));
    assert!(dir.path().join("cell_2_3").join("timeseries.csv").exists());
}

//! The four subcommands of the `hopf-crf` binary.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 a verification
//! check failed, 3 initial data not admissible, 4 positivity lost during the
//! flow, 5 at least one sweep cell did not complete.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::diagnostics::MonitorRecord;
use crate::error::{Error, Result};
use crate::flow::{make_initial_potential, run_flow_with, FlowObserver, FlowState, GridSpec};
use crate::geometry::{ambient_from_reduced, HopfModuli, ReducedCoord};
use crate::hermitian::Hermitian2;
use crate::io::{self, csv_row, fmt_f64, Manifest, TimeseriesWriter};
use crate::tensors::{HessianVariant, PointTensors};
use crate::verify::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_INADMISSIBLE: i32 = 3;
pub const EXIT_POSITIVITY: i32 = 4;
pub const EXIT_SWEEP_INCOMPLETE: i32 = 5;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run `f` on a pool of `threads` workers, or the global pool when 0.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::ConfigRange { key: "threads".into(), message: e.to_string() })?;
    Ok(pool.install(f))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let m = cfg.moduli()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let reports = run_suite(&m, &cfg.verify_config())?;

    let mut csv = String::from("name,samples,max_residual,tolerance,pass,expected\n");
    let mut summary = format!(
        "verification for |alpha| = {}, |beta| = {} (hessian variant: {}, seed {})\n",
        m.abs_alpha, m.abs_beta, cfg.hessian_variant, cfg.seed
    );
    for r in &reports {
        let expected = if r.expected == crate::verify::Expectation::Pass { "pass" } else { "fail" };
        csv += &format!(
            "{},{},{},{},{},{}\n",
            r.name,
            r.samples,
            fmt_f64(r.max_residual),
            fmt_f64(r.tolerance),
            r.pass,
            expected
        );
        summary += &format!(
            "  [{}] {:<32} residual {:>10.3e}  tol {:>8.1e}  expected {}\n",
            if r.ok() { " ok " } else { "FAIL" },
            r.name,
            r.max_residual,
            r.tolerance,
            expected
        );
    }
    let failed = reports.iter().filter(|r| !r.ok()).count();
    summary += &format!("{} of {} checks behaved as expected\n", reports.len() - failed, reports.len());
    fs::write(cfg.out_dir.join("verify.csv"), csv)?;
    fs::write(cfg.out_dir.join("verify_summary.txt"), &summary)?;
    print!("{summary}");
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Writes monitor rows and snapshots as the flow produces them, and keeps
/// what the sweep summary needs.
struct FlowFiles {
    series: TimeseriesWriter,
    snapshot_dir: PathBuf,
    first: Option<MonitorRecord>,
    last: Option<MonitorRecord>,
    sup_trace: f64,
}

impl FlowObserver for FlowFiles {
    fn record(&mut self, r: &MonitorRecord) -> Result<()> {
        self.series.write(r)?;
        self.first.get_or_insert(*r);
        self.last = Some(*r);
        self.sup_trace = self.sup_trace.max(r.max_trace_chi_omega);
        Ok(())
    }

    fn snapshot(&mut self, state: &FlowState) -> Result<()> {
        fs::create_dir_all(&self.snapshot_dir)?;
        io::write_snapshot(&self.snapshot_dir.join(io::snapshot_file_name(state.t)), state)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Termination {
    /// `completed`, `inadmissible_initial_data`, `positivity_failure` or `error`.
    pub reason: &'static str,
    pub detail: String,
    pub t_final: Option<f64>,
    pub steps: Option<usize>,
    pub rejected_steps: Option<usize>,
}

/// Outcome of one flow run on disk.
#[derive(Debug, Clone)]
pub struct FlowReport {
    pub exit_code: i32,
    pub termination: Termination,
    pub first: Option<MonitorRecord>,
    pub last: Option<MonitorRecord>,
    pub sup_trace: f64,
}

fn flow_to_files(cfg: &RunConfig, files: &mut FlowFiles) -> Result<crate::flow::FlowSummary> {
    let m = cfg.moduli()?;
    let grid = cfg.grid()?;
    let phi = make_initial_potential(&m, &grid, &cfg.initial_data())?;
    let state = FlowState::new(m, grid, 0.0, phi)?;
    run_flow_with(state, &cfg.control(), files)
}

/// Run the flow into `cfg.out_dir`. The manifest is written whatever happens.
pub fn run_flow_to_dir(cfg: &RunConfig) -> Result<FlowReport> {
    let clock = Instant::now();
    let started_at = io::timestamp_now();
    fs::create_dir_all(&cfg.out_dir)?;
    let mut files = FlowFiles {
        series: TimeseriesWriter::create(&cfg.out_dir.join(io::TIMESERIES_FILE))?,
        snapshot_dir: cfg.out_dir.join(io::SNAPSHOT_DIR),
        first: None,
        last: None,
        sup_trace: f64::NEG_INFINITY,
    };
    let outcome = flow_to_files(cfg, &mut files);
    let FlowFiles { series, first, last, sup_trace, .. } = files;
    let flushed = series.finish();

    let (exit_code, termination) = match outcome {
        Ok(s) => (
            EXIT_OK,
            Termination {
                reason: "completed",
                detail: format!("reached t_max = {}", fmt_f64(s.state.t)),
                t_final: Some(s.state.t),
                steps: Some(s.steps),
                rejected_steps: Some(s.rejected),
            },
        ),
        Err(e) => {
            let t_final = last.map(|r| r.t);
            let (code, reason) = match &e {
                Error::Inadmissible(_) => (EXIT_INADMISSIBLE, "inadmissible_initial_data"),
                Error::PositivityLost { .. } => (EXIT_POSITIVITY, "positivity_failure"),
                _ => (EXIT_CONFIG, "error"),
            };
            (code, Termination { reason, detail: e.to_string(), t_final, steps: None, rejected_steps: None })
        }
    };
    let manifest = Manifest {
        config: cfg,
        version: VERSION,
        started_at,
        wall_seconds: clock.elapsed().as_secs_f64(),
        termination: termination.clone(),
    };
    io::write_manifest(&cfg.out_dir, &manifest)?;
    flushed?;
    Ok(FlowReport { exit_code, termination, first, last, sup_trace })
}

pub fn cmd_flow(cfg: &RunConfig) -> Result<i32> {
    cfg.moduli()?;
    let report = run_flow_to_dir(cfg)?;
    let t = &report.termination;
    match report.exit_code {
        EXIT_OK => println!("flow {}: {} -> {}", t.reason, t.detail, cfg.out_dir.display()),
        _ => eprintln!("flow {}: {}", t.reason, t.detail),
    }
    Ok(report.exit_code)
}

/// Eigenvalues within `1e-12 · scale` of zero are reported as 0; the
/// forms tabulated here are semidefinite with an exact kernel.
fn clean(v: f64, scale: f64) -> f64 {
    if v.abs() <= 1e-12 * scale {
        0.0
    } else {
        v
    }
}

pub const STATIC_HEADER: &str = "i,j,u,sigma,abs_z1,abs_z2,phi,z,det_hat,det_hat_phi2,trace_chi_hat,\
hat_minus_theta_min,hat_minus_theta_max,ricci_chi_min,ricci_chi_max";

/// One row per cell of an `n_u × n_sigma` grid on the reduced cylinder,
/// evaluated at the real-positive representative.
pub fn static_table(m: &HopfModuli, n_u: usize, n_sigma: usize) -> Result<Vec<String>> {
    let grid = GridSpec::for_moduli(m, n_u, n_sigma)?;
    let mut rows = Vec::with_capacity(grid.len());
    for i in 0..n_u {
        for j in 0..n_sigma {
            let (u, sigma) = (grid.u(i), grid.sigma(j));
            let p = ambient_from_reduced(m, &ReducedCoord { u, sigma });
            let t = PointTensors::evaluate(m, &p, HessianVariant::Corrected)?;
            let phi = t.data.phi;
            let scale = t.hat.norm();
            let eig = |h: &Hermitian2| {
                let e = h.eigenvalues();
                [clean(e[0], scale), clean(e[1], scale)]
            };
            let hm = eig(&(t.hat - t.theta));
            let rc = eig(&t.ricci_chi());
            let vals = [
                u,
                sigma,
                p.z1.norm(),
                p.z2.norm(),
                phi,
                t.z,
                t.hat.det(),
                t.hat.det() * phi * phi,
                crate::hermitian::trace_pair(&t.chi, &t.hat)?,
                hm[0],
                hm[1],
                rc[0],
                rc[1],
            ];
            rows.push(format!("{i},{j},{}", csv_row(&vals)));
        }
    }
    Ok(rows)
}

pub fn cmd_static(cfg: &RunConfig) -> Result<i32> {
    let m = cfg.moduli()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let rows = static_table(&m, cfg.static_n_u, cfg.static_n_sigma)?;
    let path = cfg.out_dir.join("static.csv");
    let mut out = std::io::BufWriter::new(fs::File::create(&path)?);
    writeln!(out, "{STATIC_HEADER}")?;
    for r in &rows {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(EXIT_OK)
}

/// Upper-triangle moduli pairs `|α| <= |β|` from `values`, in ascending order.
pub fn sweep_cells(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mut cells = Vec::new();
    for (k, &a) in v.iter().enumerate() {
        for &b in &v[k..] {
            cells.push((a, b));
        }
    }
    cells
}

fn cell_dir(root: &Path, a: f64, b: f64) -> PathBuf {
    root.join(format!("cell_{}_{}", fmt_f64(a), fmt_f64(b)))
}

pub const SWEEP_HEADER: &str =
    "abs_alpha,abs_beta,volume_initial,t_final,sup_max_trace_chi_omega,loop_length_spread,exit_code";

pub fn cmd_sweep(cfg: &RunConfig) -> Result<i32> {
    let clock = Instant::now();
    let started_at = io::timestamp_now();
    fs::create_dir_all(&cfg.out_dir)?;
    let cells = sweep_cells(&cfg.sweep_values);
    let results: Vec<(f64, f64, Result<FlowReport>)> = cells
        .par_iter()
        .map(|&(a, b)| {
            let mut c = cfg.clone();
            c.abs_alpha = a;
            c.abs_beta = b;
            c.out_dir = cell_dir(&cfg.out_dir, a, b);
            (a, b, run_flow_to_dir(&c))
        })
        .collect();

    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut incomplete = 0;
    for (a, b, r) in &results {
        let nan = f64::NAN;
        let (vol0, t_final, sup, spread, code) = match r {
            Ok(rep) => (
                rep.first.map_or(nan, |f| f.volume),
                rep.last.map_or(nan, |l| l.t),
                rep.sup_trace,
                rep.last.map_or(nan, |l| l.loop_length_max - l.loop_length_min),
                rep.exit_code,
            ),
            Err(_) => (nan, nan, nan, nan, EXIT_CONFIG),
        };
        if code != EXIT_OK {
            incomplete += 1;
        }
        csv += &format!("{},{code}\n", csv_row(&[*a, *b, vol0, t_final, sup, spread]));
    }
    fs::write(cfg.out_dir.join("sweep.csv"), csv)?;
    let detail = format!("{} cells, {} incomplete", results.len(), incomplete);
    let manifest = Manifest {
        config: cfg,
        version: VERSION,
        started_at,
        wall_seconds: clock.elapsed().as_secs_f64(),
        termination: Termination {
            reason: if incomplete == 0 { "completed" } else { "error" },
            detail: detail.clone(),
            t_final: None,
            steps: None,
            rejected_steps: None,
        },
    };
    io::write_manifest(&cfg.out_dir, &manifest)?;
    println!("sweep: {detail} -> {}", cfg.out_dir.display());
    Ok(if incomplete == 0 { EXIT_OK } else { EXIT_SWEEP_INCOMPLETE })
}

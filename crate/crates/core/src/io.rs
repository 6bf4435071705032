//! Output formats: CSV tables, φ snapshots and the run manifest.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same `f64`. Magnitudes in `[1e-5, 1e16)` use plain positional notation,
//! everything else scientific (`1.5e-7`). Zero is `0`, non-finite values are
//! `NaN`, `inf` and `-inf`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::MonitorRecord;
use crate::error::{Error, Result};
use crate::flow::{FlowState, GridSpec};
use crate::geometry::HopfModuli;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = v.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

pub fn timeseries_header() -> String {
    MonitorRecord::HEADER.join(",")
}

/// Streams monitor records to a CSV file.
pub struct TimeseriesWriter {
    out: std::io::BufWriter<fs::File>,
}

impl TimeseriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(out, "{}", timeseries_header())?;
        Ok(TimeseriesWriter { out })
    }

    pub fn write(&mut self, r: &MonitorRecord) -> Result<()> {
        writeln!(self.out, "{}", csv_row(&r.values()))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_timeseries(path: &Path, records: &[MonitorRecord]) -> Result<()> {
    let mut w = TimeseriesWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub abs_alpha: f64,
    pub abs_beta: f64,
    pub n_u: usize,
    pub n_sigma: usize,
    pub t: f64,
}

/// φ on the grid, row-major with `u` as the row index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub phi: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(state: &FlowState) -> Self {
        Snapshot {
            header: SnapshotHeader {
                abs_alpha: state.moduli.abs_alpha,
                abs_beta: state.moduli.abs_beta,
                n_u: state.grid.n_u,
                n_sigma: state.grid.n_sigma,
                t: state.t,
            },
            phi: state.phi.clone(),
        }
    }

    pub fn check_compatible(&self, path: &Path, m: &HopfModuli, grid: &GridSpec) -> Result<()> {
        let fail = |message: String| Err(Error::Snapshot { path: path.to_path_buf(), message });
        let h = &self.header;
        if h.abs_alpha != m.abs_alpha || h.abs_beta != m.abs_beta {
            return fail(format!(
                "moduli ({}, {}) differ from the run's ({}, {})",
                h.abs_alpha, h.abs_beta, m.abs_alpha, m.abs_beta
            ));
        }
        if h.n_u != grid.n_u || h.n_sigma != grid.n_sigma {
            return fail(format!(
                "grid {} x {} differs from the run's {} x {}",
                h.n_u, h.n_sigma, grid.n_u, grid.n_sigma
            ));
        }
        if self.phi.len() != grid.len() {
            return fail(format!("{} values for a {} x {} grid", self.phi.len(), h.n_u, h.n_sigma));
        }
        if let Some(k) = self.phi.iter().position(|v| !v.is_finite()) {
            return fail(format!("non-finite value at index {k}"));
        }
        Ok(())
    }
}

pub fn snapshot_file_name(t: f64) -> String {
    format!("phi_t{}.json", fmt_f64(t))
}

pub fn write_snapshot(path: &Path, state: &FlowState) -> Result<()> {
    let text = serde_json::to_string(&Snapshot::from_state(state))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Snapshot { path: path.to_path_buf(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| Error::Snapshot { path: path.to_path_buf(), message: e.to_string() })
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<C: Serialize, T: Serialize> {
    pub config: C,
    pub version: &'static str,
    pub started_at: String,
    pub wall_seconds: f64,
    pub termination: T,
}

pub fn timestamp_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn write_manifest<C: Serialize, T: Serialize>(dir: &Path, manifest: &Manifest<C, T>) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-7, 6.02e23, 46.17714, 1e-5, 9.999e15, f64::MIN_POSITIVE, -0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1.5e-7), "1.5e-7");
        assert_eq!(fmt_f64(2.0), "2");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn header_is_exact() {
        assert_eq!(
            timeseries_header(),
            "t,volume,volume_predicted,max_trace_chi_omega,min_metric_eigenvalue,max_psi_dot,max_abs_psi,q_max,loop_length_min,loop_length_max,c1_norm_phi"
        );
    }

    #[test]
    fn snapshot_round_trip() {
        let m = HopfModuli::new(2.0, 4.0).unwrap();
        let g = GridSpec::for_moduli(&m, 8, 8).unwrap();
        let phi: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.37).sin() / 7.0).collect();
        let st = FlowState::new(m, g, 0.125, phi).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(snapshot_file_name(st.t));
        write_snapshot(&p, &st).unwrap();
        let back = read_snapshot(&p).unwrap();
        assert_eq!(back.phi, st.phi);
        assert_eq!(back.header.t, 0.125);
        back.check_compatible(&p, &m, &g).unwrap();
        let g2 = GridSpec::for_moduli(&m, 16, 8).unwrap();
        assert!(back.check_compatible(&p, &m, &g2).is_err());
    }
}

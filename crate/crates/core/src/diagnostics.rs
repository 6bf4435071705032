//! Monitors evaluated along the flow.
//!
//! All quantities are computed in the χ-orthonormal frame of
//! [`crate::flow::chart`], where `tr_χ ω = tr M` and `ω² / χ² = det M`.
//! Cell values are produced in parallel and reduced sequentially in grid
//! order, so results do not depend on the thread count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flow::{flow_rhs, frame_metrics, FlowState, GridSpec, RowGeometry, Sym2};
use crate::geometry::HopfModuli;

/// Volume of the round `S³` of unit radius; fixes the normalisation of
/// the reduced volume integral.
const SPHERE_VOLUME: f64 = 2.0 * PI * PI;

/// One row of the flow time series. Field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub t: f64,
    pub volume: f64,
    pub volume_predicted: f64,
    pub max_trace_chi_omega: f64,
    /// Smallest eigenvalue of ω(t) relative to χ.
    pub min_metric_eigenvalue: f64,
    pub max_psi_dot: f64,
    pub max_abs_psi: f64,
    pub q_max: f64,
    pub loop_length_min: f64,
    pub loop_length_max: f64,
    pub c1_norm_phi: f64,
}

impl MonitorRecord {
    pub const HEADER: [&'static str; 11] = [
        "t",
        "volume",
        "volume_predicted",
        "max_trace_chi_omega",
        "min_metric_eigenvalue",
        "max_psi_dot",
        "max_abs_psi",
        "q_max",
        "loop_length_min",
        "loop_length_max",
        "c1_norm_phi",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.volume,
            self.volume_predicted,
            self.max_trace_chi_omega,
            self.min_metric_eigenvalue,
            self.max_psi_dot,
            self.max_abs_psi,
            self.q_max,
            self.loop_length_min,
            self.loop_length_max,
            self.c1_norm_phi,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

fn volume_from(grid: &GridSpec, rows: &[RowGeometry], det: impl Fn(usize, usize) -> f64) -> f64 {
    let cell = grid.du() * grid.dsigma();
    let mut sum = 0.0;
    for i in 0..grid.n_u {
        for (j, row) in rows.iter().enumerate() {
            sum += det(i, j) * row.z;
        }
    }
    SPHERE_VOLUME * sum * cell
}

/// Midpoint-rule volume `2π² ∬ det M Z du dσ` of ω(t).
pub fn total_volume(state: &FlowState) -> Result<f64> {
    let g = frame_metrics(state)?;
    Ok(volume_from(&state.grid, state.rows(), |i, j| g[state.grid.idx(i, j)].det()))
}

/// Discrete volume of ω̂ on `grid`, the same quadrature as [`total_volume`].
pub fn reference_volume(m: &HopfModuli, grid: &GridSpec) -> Result<f64> {
    let rows: Vec<RowGeometry> =
        (0..grid.n_sigma).map(|j| RowGeometry::new(m, grid.sigma(j))).collect::<Result<_>>()?;
    Ok(volume_from(grid, &rows, |_, j| rows[j].hat.det()))
}

/// Closed-form volume of ω̂: `π² L / (2 k1 k2)`.
pub fn exact_reference_volume(m: &HopfModuli) -> f64 {
    PI * PI * m.period / (2.0 * m.k1 * m.k2)
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

/// `max tr_χ ω(t)` over the grid.
pub fn trace_field_max(state: &FlowState) -> Result<f64> {
    Ok(max_of(frame_metrics(state)?.iter().map(Sym2::trace)))
}

pub fn min_metric_eigenvalue(state: &FlowState) -> Result<f64> {
    Ok(frame_metrics(state)?.iter().map(|g| g.eigenvalues()[0]).fold(f64::INFINITY, f64::min))
}

/// `ψ = φ + 3t log Z`.
pub fn psi_field(state: &FlowState) -> Vec<f64> {
    let ns = state.grid.n_sigma;
    let rows = state.rows();
    state.phi.iter().enumerate().map(|(n, p)| p + 3.0 * state.t * rows[n % ns].log_z).collect()
}

fn q_offset(t: f64, a: f64, b: f64) -> f64 {
    let e = 1.0 - 2.0 * t;
    -a * e * (e.ln() - 1.0) - b * t
}

fn q_max_from(state: &FlowState, g: &[Sym2], a: f64, b: f64) -> f64 {
    let off = q_offset(state.t, a, b);
    max_of(g.iter().zip(&state.phi).map(|(g, p)| g.trace() - a * p + off))
}

/// `max Q` with `Q = tr_χ ω - Aφ - A(1 - 2t)(log(1 - 2t) - 1) - Bt`.
pub fn q_functional_max(state: &FlowState, a: f64, b: f64) -> Result<f64> {
    let g = frame_metrics(state)?;
    Ok(q_max_from(state, &g, a, b))
}

fn potential_monitors_from(state: &FlowState, rhs: &[f64]) -> (f64, f64) {
    let ns = state.grid.n_sigma;
    let rows = state.rows();
    let abs_psi = max_of(psi_field(state).iter().map(|v| v.abs()));
    let psi_dot = max_of(rhs.iter().enumerate().map(|(n, r)| r + 3.0 * rows[n % ns].log_z));
    (abs_psi, psi_dot)
}

/// `(max |ψ|, max ψ̇)` with `ψ̇ = φ̇ + 3 log Z`.
pub fn potential_monitors(state: &FlowState) -> Result<(f64, f64)> {
    let rhs = flow_rhs(state)?;
    Ok(potential_monitors_from(state, &rhs))
}

fn loop_lengths_from(state: &FlowState, g: &[Sym2]) -> (f64, f64) {
    let grid = &state.grid;
    let du = grid.du();
    let rows = state.rows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (j, row) in rows.iter().enumerate() {
        let mut len = 0.0;
        for i in 0..grid.n_u {
            len += (2.0 * g[grid.idx(i, j)].quad(row.loop_vector)).sqrt() * du;
        }
        lo = lo.min(len);
        hi = hi.max(len);
    }
    (lo, hi)
}

/// Shortest and longest u-circle over the σ-rows.
pub fn loop_lengths(state: &FlowState) -> Result<(f64, f64)> {
    let g = frame_metrics(state)?;
    Ok(loop_lengths_from(state, &g))
}

/// `max |φ|` plus the largest first-difference quotient in `u` or σ.
pub fn c1_norm(state: &FlowState) -> f64 {
    let grid = &state.grid;
    let phi = &state.phi;
    let (du, ds) = (grid.du(), grid.dsigma());
    let mut grad = 0.0f64;
    for i in 0..grid.n_u {
        let ip = (i + 1) % grid.n_u;
        for j in 0..grid.n_sigma {
            let here = phi[grid.idx(i, j)];
            grad = grad.max((phi[grid.idx(ip, j)] - here).abs() / du);
            if j + 1 < grid.n_sigma {
                grad = grad.max((phi[grid.idx(i, j + 1)] - here).abs() / ds);
            }
        }
    }
    max_of(phi.iter().map(|v| v.abs())) + grad
}

/// Every monitor at once, reusing `rhs = φ̇` already computed by the solver.
pub fn monitor_record(state: &FlowState, rhs: &[f64], a: f64, b: f64) -> Result<MonitorRecord> {
    let g = frame_metrics(state)?;
    let grid = &state.grid;
    let volume = volume_from(grid, state.rows(), |i, j| g[grid.idx(i, j)].det());
    let vol0 = volume_from(grid, state.rows(), |_, j| state.rows()[j].hat.det());
    let (max_abs_psi, max_psi_dot) = potential_monitors_from(state, rhs);
    let (loop_length_min, loop_length_max) = loop_lengths_from(state, &g);
    let eig: Vec<f64> = g.par_iter().map(|m| m.eigenvalues()[0]).collect();
    Ok(MonitorRecord {
        t: state.t,
        volume,
        volume_predicted: (1.0 - 2.0 * state.t) * vol0,
        max_trace_chi_omega: max_of(g.iter().map(Sym2::trace)),
        min_metric_eigenvalue: eig.iter().copied().fold(f64::INFINITY, f64::min),
        max_psi_dot,
        max_abs_psi,
        q_max: q_max_from(state, &g, a, b),
        loop_length_min,
        loop_length_max,
        c1_norm_phi: c1_norm(state),
    })
}

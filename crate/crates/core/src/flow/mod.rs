//! Reduced Chern-Ricci flow.
//!
//! For torus-invariant potentials the flow `ω(t) = ω_t + i∂∂̄φ` reduces to the
//! scalar equation
//!
//! ```text
//! φ̇ = log det(ω_t + i∂∂̄φ) - log det χ,    ω_t = (1 - 2t) ω̂ + 2t Θ
//! ```
//!
//! on the cylinder `(u mod L) × [0, 1]`. Space is discretised with the
//! stencils of [`grid`], time with classical RK4 under an adaptive step.

pub mod chart;
pub mod grid;
pub mod initial;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{monitor_record, MonitorRecord};
use crate::error::{Error, Result};
use crate::geometry::HopfModuli;
use crate::hermitian::Hermitian2;

pub use chart::{chart_jacobians, ChartJacobians, RowGeometry, Sym2};
pub use grid::{GridSpec, ReducedDerivs};
pub use initial::{make_initial_potential, InitialData, InitialFamily};

/// Potential φ on the grid at time `t`, with the σ-row geometry it is
/// evaluated against.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub moduli: HopfModuli,
    pub grid: GridSpec,
    pub t: f64,
    pub phi: Vec<f64>,
    rows: Arc<Vec<RowGeometry>>,
}

impl FlowState {
    pub fn new(moduli: HopfModuli, grid: GridSpec, t: f64, phi: Vec<f64>) -> Result<Self> {
        let rows = Arc::new(build_rows(&moduli, &grid)?);
        FlowState::with_rows(moduli, grid, t, phi, rows)
    }

    pub fn zero(moduli: HopfModuli, grid: GridSpec) -> Result<Self> {
        FlowState::new(moduli, grid, 0.0, vec![0.0; grid.len()])
    }

    fn with_rows(
        moduli: HopfModuli,
        grid: GridSpec,
        t: f64,
        phi: Vec<f64>,
        rows: Arc<Vec<RowGeometry>>,
    ) -> Result<Self> {
        if (grid.period - moduli.period).abs() > 1e-12 * moduli.period {
            return Err(Error::Grid(format!(
                "grid period {} does not match the moduli period {}",
                grid.period, moduli.period
            )));
        }
        if phi.len() != grid.len() {
            return Err(Error::Grid(format!("field has {} values, grid has {}", phi.len(), grid.len())));
        }
        if !(0.0..0.5).contains(&t) {
            return Err(Error::BeyondMaximalTime { t });
        }
        Ok(FlowState { moduli, grid, t, phi, rows })
    }

    /// Same grid and geometry, new time and field.
    pub fn advanced(&self, t: f64, phi: Vec<f64>) -> Result<Self> {
        FlowState::with_rows(self.moduli, self.grid, t, phi, Arc::clone(&self.rows))
    }

    pub fn rows(&self) -> &[RowGeometry] {
        &self.rows
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.phi[self.grid.idx(i, j)]
    }

    pub fn derivs(&self, i: usize, j: usize) -> ReducedDerivs {
        grid::derivs(&self.grid, &self.phi, i, j)
    }
}

impl GridSpec {
    pub fn for_moduli(m: &HopfModuli, n_u: usize, n_sigma: usize) -> Result<GridSpec> {
        GridSpec::new(n_u, n_sigma, m.period)
    }
}

fn build_rows(m: &HopfModuli, grid: &GridSpec) -> Result<Vec<RowGeometry>> {
    (0..grid.n_sigma).map(|j| RowGeometry::new(m, grid.sigma(j))).collect()
}

fn check_index(state: &FlowState, i: usize, j: usize) {
    assert!(
        i < state.grid.n_u && j < state.grid.n_sigma,
        "grid index ({i}, {j}) out of range for {} x {}",
        state.grid.n_u,
        state.grid.n_sigma
    );
}

/// Rescale a frame tensor back to ambient coordinates at the real-positive
/// representative of cell `(i, j)`.
fn to_ambient(state: &FlowState, i: usize, frame: &Sym2) -> Hermitian2 {
    let u = state.grid.u(i);
    let (k1, k2) = (state.moduli.k1, state.moduli.k2);
    let s = |ka: f64, kb: f64| (-(ka + kb) * u).exp();
    Hermitian2::real(frame.xx * s(k1, k1), frame.yy * s(k2, k2), frame.xy * s(k1, k2))
}

/// `∂_i ∂_j̄ φ` at the real-positive representative of cell `(i, j)`.
pub fn reduced_complex_hessian(state: &FlowState, i: usize, j: usize) -> Hermitian2 {
    check_index(state, i, j);
    let n = state.rows[j].hessian(&state.derivs(i, j));
    to_ambient(state, i, &n)
}

/// `ω_t + i∂∂̄φ` in the χ-orthonormal frame, with positivity enforced.
pub fn frame_metric(state: &FlowState, i: usize, j: usize) -> Result<Sym2> {
    check_index(state, i, j);
    let row = &state.rows[j];
    let g = row.reference(state.t).add(&row.hessian(&state.derivs(i, j)));
    if !g.is_positive_definite() {
        return Err(Error::NotPositive { what: "evolving metric", i, j, min_eigenvalue: g.eigenvalues()[0] });
    }
    Ok(g)
}

/// `ω_t + i∂∂̄φ` in ambient coordinates at the real-positive representative.
pub fn assemble_evolving_metric(state: &FlowState, i: usize, j: usize) -> Result<Hermitian2> {
    if state.t >= 0.5 {
        return Err(Error::BeyondMaximalTime { t: state.t });
    }
    let g = frame_metric(state, i, j)?;
    Ok(to_ambient(state, i, &g))
}

/// All frame metrics, column-major in `u` like the field itself.
pub fn frame_metrics(state: &FlowState) -> Result<Vec<Sym2>> {
    let ns = state.grid.n_sigma;
    let cols: Vec<Result<Vec<Sym2>>> =
        (0..state.grid.n_u).into_par_iter().map(|i| (0..ns).map(|j| frame_metric(state, i, j)).collect()).collect();
    let mut out = Vec::with_capacity(state.grid.len());
    for c in cols {
        out.extend(c?);
    }
    Ok(out)
}

/// Right-hand side of the flow together with the diffusion number `ρ` of its
/// linearisation: `Σ |tr(g⁻¹ C_x)| s_x` over the stencil terms `x`, with the
/// scales `s_x` of [`grid::stencil_scales`]. The step is `cfl / ρ`; since the
/// spectral radius is at most `4ρ`, any `cfl` below about 0.7 keeps RK4
/// stable.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub rhs: Vec<f64>,
    pub rho: f64,
}

fn evaluate(grid: &GridSpec, rows: &[RowGeometry], phi: &[f64], t: f64, want_rho: bool) -> Result<Evaluation> {
    let ns = grid.n_sigma;
    let refs: Vec<Sym2> = rows.iter().map(|r| r.reference(t)).collect();
    let st = grid::Stencil::new(grid);
    let b = grid::stencil_scales(grid);
    let mut rhs = vec![0.0; grid.len()];
    let per_col: Vec<Result<f64>> = rhs
        .par_chunks_mut(ns)
        .enumerate()
        .map(|(i, out)| {
            let [cm, c, cp] = grid::columns(grid, phi, i);
            let mut rho = 0.0f64;
            for (j, slot) in out.iter_mut().enumerate() {
                let row = &rows[j];
                let g = refs[j].add(&row.hessian(&st.at(cm, c, cp, j)));
                let det = g.det();
                if !(g.xx > 0.0 && det > 0.0) {
                    return Err(Error::NotPositive {
                        what: "evolving metric",
                        i,
                        j,
                        min_eigenvalue: g.eigenvalues()[0],
                    });
                }
                *slot = det.ln();
                if want_rho {
                    let k = |m: &Sym2| g.inv_trace(m, det).abs();
                    let r = b.uu * k(&row.c_uu)
                        + b.ss * k(&row.c_ss)
                        + b.us * k(&row.c_us)
                        + b.u * k(&row.c_u)
                        + b.s * k(&row.c_s);
                    rho = rho.max(r);
                }
            }
            Ok(rho)
        })
        .collect();
    let mut rho = 0.0f64;
    for r in per_col {
        rho = rho.max(r?);
    }
    Ok(Evaluation { rhs, rho })
}

/// `φ̇ = log det(ω_t + i∂∂̄φ) - log det χ` on the grid.
pub fn flow_rhs(state: &FlowState) -> Result<Vec<f64>> {
    Ok(evaluate(&state.grid, &state.rows, &state.phi, state.t, false)?.rhs)
}

pub fn evaluate_state(state: &FlowState) -> Result<Evaluation> {
    evaluate(&state.grid, &state.rows, &state.phi, state.t, true)
}

fn axpy(phi: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    phi.iter().zip(k).map(|(p, k)| p + a * k).collect()
}

/// One RK4 step ending at `t_new`, given the stage-one evaluation `k1`.
/// Returns the new state with its own evaluation, which also certifies
/// positivity at the new time.
fn rk4_to(state: &FlowState, k1: &Evaluation, t_new: f64) -> Result<(FlowState, Evaluation)> {
    let t = state.t;
    let dt = t_new - t;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStep { dt });
    }
    if t_new >= 0.5 {
        return Err(Error::BeyondMaximalTime { t: t_new });
    }
    let (g, rows, phi) = (&state.grid, &state.rows[..], &state.phi[..]);
    let k2 = evaluate(g, rows, &axpy(phi, 0.5 * dt, &k1.rhs), t + 0.5 * dt, false)?;
    let k3 = evaluate(g, rows, &axpy(phi, 0.5 * dt, &k2.rhs), t + 0.5 * dt, false)?;
    let k4 = evaluate(g, rows, &axpy(phi, dt, &k3.rhs), t_new, false)?;
    let w = dt / 6.0;
    let new: Vec<f64> =
        (0..phi.len()).map(|n| phi[n] + w * (k1.rhs[n] + 2.0 * (k2.rhs[n] + k3.rhs[n]) + k4.rhs[n])).collect();
    let eval = evaluate(g, rows, &new, t_new, true)?;
    Ok((state.advanced(t_new, new)?, eval))
}

/// Classical four-stage step of size `dt`.
pub fn step_rk4(state: &FlowState, dt: f64) -> Result<FlowState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStep { dt });
    }
    if state.t + dt >= 0.5 {
        return Err(Error::BeyondMaximalTime { t: state.t + dt });
    }
    let k1 = evaluate_state(state)?;
    Ok(rk4_to(state, &k1, state.t + dt)?.0)
}

/// Closed-form potential on the round surface: the solution of
/// `φ̇ = log(1 - 2t)`, `φ(0) = 0`.
pub fn exact_round_potential(t: f64) -> Result<f64> {
    if !(t.is_finite() && t < 0.5) || t < 0.0 {
        return Err(Error::BeyondMaximalTime { t });
    }
    let e = 1.0 - 2.0 * t;
    Ok(-e * (e.ln() - 1.0) / 2.0 - 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowControl {
    pub t_max: f64,
    pub cfl: f64,
    pub monitor_cadence: f64,
    pub snapshot_times: Vec<f64>,
    pub max_retries: usize,
    /// Weights of the Q functional.
    pub a: f64,
    pub b: f64,
}

impl Default for FlowControl {
    fn default() -> Self {
        FlowControl {
            t_max: 0.49,
            cfl: 0.2,
            monitor_cadence: 0.01,
            snapshot_times: Vec::new(),
            max_retries: 20,
            a: 10.0,
            b: 10.0,
        }
    }
}

impl FlowControl {
    fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Err(Error::ConfigRange { key: key.into(), message });
        if !(self.t_max > 0.0 && self.t_max < 0.5) {
            return bad("t_max", format!("must lie in (0, 0.5), got {}", self.t_max));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return bad("cfl", format!("must be positive, got {}", self.cfl));
        }
        if !(self.monitor_cadence > 0.0 && self.monitor_cadence.is_finite()) {
            return bad("monitor_cadence", format!("must be positive, got {}", self.monitor_cadence));
        }
        if !(self.a > 0.0 && self.b > 0.0) {
            return bad("A", format!("A and B must be positive, got {} and {}", self.a, self.b));
        }
        Ok(())
    }
}

/// Receives monitor records and snapshots as the flow advances.
pub trait FlowObserver {
    fn record(&mut self, _record: &MonitorRecord) -> Result<()> {
        Ok(())
    }
    fn snapshot(&mut self, _state: &FlowState) -> Result<()> {
        Ok(())
    }
}

impl FlowObserver for () {}

impl FlowObserver for Vec<MonitorRecord> {
    fn record(&mut self, record: &MonitorRecord) -> Result<()> {
        self.push(*record);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FlowSummary {
    pub state: FlowState,
    pub steps: usize,
    pub rejected: usize,
}

/// Integrate from `state` to `control.t_max`.
///
/// The step is `cfl / ρ`, shortened to land exactly on monitor and snapshot
/// times and halved (at most `max_retries` times in a row) whenever a stage
/// loses positivity.
pub fn run_flow_with<O: FlowObserver + ?Sized>(
    state: FlowState,
    control: &FlowControl,
    observer: &mut O,
) -> Result<FlowSummary> {
    control.validate()?;
    let t_max = control.t_max;
    let mut snaps: Vec<f64> = control.snapshot_times.iter().copied().filter(|s| *s >= state.t && *s <= t_max).collect();
    snaps.sort_by(f64::total_cmp);
    snaps.dedup();
    let mut si = 0;
    let time_eps = 1e-12;

    let mut eval = evaluate_state(&state).map_err(|e| Error::Inadmissible(Box::new(e)))?;
    let mut state = state;
    let mut k_mon = (state.t / control.monitor_cadence).floor() as usize + 1;
    observer.record(&monitor_record(&state, &eval.rhs, control.a, control.b)?)?;
    while si < snaps.len() && snaps[si] <= state.t + time_eps {
        observer.snapshot(&state)?;
        si += 1;
    }

    let (mut steps, mut rejected) = (0, 0);
    while state.t < t_max - time_eps {
        let next_mon = (k_mon as f64 * control.monitor_cadence).min(t_max);
        let target = snaps.get(si).map_or(next_mon, |s| s.min(next_mon));
        let mut dt = control.cfl / eval.rho;
        let mut land = dt >= target - state.t;
        let mut retries = 0;
        let (new, new_eval) = loop {
            let t_new = if land { target } else { state.t + dt };
            match rk4_to(&state, &eval, t_new) {
                Ok(ok) => break ok,
                Err(e @ Error::NotPositive { .. }) => {
                    rejected += 1;
                    retries += 1;
                    if retries > control.max_retries {
                        return Err(Error::PositivityLost {
                            t: state.t,
                            retries: control.max_retries,
                            source: Box::new(e),
                        });
                    }
                    dt = 0.5 * dt.min(target - state.t);
                    land = false;
                }
                Err(e) => return Err(e),
            }
        };
        state = new;
        eval = new_eval;
        steps += 1;

        let mut due = false;
        while (k_mon as f64 * control.monitor_cadence) <= state.t + time_eps {
            k_mon += 1;
            due = true;
        }
        if due || state.t >= t_max - time_eps {
            observer.record(&monitor_record(&state, &eval.rhs, control.a, control.b)?)?;
        }
        while si < snaps.len() && snaps[si] <= state.t + time_eps {
            observer.snapshot(&state)?;
            si += 1;
        }
    }
    Ok(FlowSummary { state, steps, rejected })
}

/// Build the initial potential, check admissibility and integrate, collecting
/// every monitor record.
pub fn run_flow(
    m: &HopfModuli,
    grid: &GridSpec,
    initial: &InitialData,
    control: &FlowControl,
) -> Result<(Vec<MonitorRecord>, FlowSummary)> {
    let phi = make_initial_potential(m, grid, initial)?;
    let state = FlowState::new(*m, *grid, 0.0, phi)?;
    let mut records = Vec::new();
    let summary = run_flow_with(state, control, &mut records)?;
    Ok((records, summary))
}

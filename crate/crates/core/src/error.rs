use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the geometry, verification and flow layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "moduli outside class-1 range: need 1 < |alpha| <= |beta|, got |alpha| = {abs_alpha}, |beta| = {abs_beta}"
    )]
    InvalidModuli { abs_alpha: f64, abs_beta: f64 },

    #[error("point (0, 0) is not in C^2 minus the origin")]
    Origin,

    #[error("Phi solver did not converge after {iterations} iterations (last s = {last})")]
    PhiNoConvergence { iterations: usize, last: f64 },

    #[error("t = {t} is at or beyond the maximal time T = 1/2")]
    BeyondMaximalTime { t: f64 },

    #[error("time step must be positive and finite, got {dt}")]
    InvalidStep { dt: f64 },

    #[error("matrix is singular (det = {det})")]
    Singular { det: f64 },

    #[error("sigma = {sigma} is outside the open interval (0, 1)")]
    SigmaOutOfRange { sigma: f64 },

    #[error("{what} is not positive definite at grid point ({i}, {j}): min eigenvalue {min_eigenvalue}")]
    NotPositive { what: &'static str, i: usize, j: usize, min_eigenvalue: f64 },

    #[error("{what} is not positive definite (min eigenvalue {min_eigenvalue})")]
    Indefinite { what: &'static str, min_eigenvalue: f64 },

    #[error("initial data not admissible: {0}")]
    Inadmissible(Box<Error>),

    #[error("unrecoverable positivity failure at t = {t} after {retries} step halvings: {source}")]
    PositivityLost {
        t: f64,
        retries: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    ConfigRange { key: String, message: String },

    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },

    #[error("LCK check: neither sign fits (residuals {plus} for +1, {minus} for -1)")]
    LckSign { plus: f64, minus: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

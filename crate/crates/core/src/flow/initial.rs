use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{frame_metrics, FlowState, GridSpec};
use crate::error::{Error, Result};
use crate::geometry::HopfModuli;
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialFamily {
    #[default]
    Zero,
    /// `ψ = ε cos(2πu/L) σ(1 - σ)`
    CosBump,
    /// Field read from a snapshot file.
    File,
}

impl std::str::FromStr for InitialFamily {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(InitialFamily::Zero),
            "cos-bump" => Ok(InitialFamily::CosBump),
            "file" => Ok(InitialFamily::File),
            other => Err(format!("unknown initial family `{other}` (expected zero|cos-bump|file)")),
        }
    }
}

impl std::fmt::Display for InitialFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitialFamily::Zero => "zero",
            InitialFamily::CosBump => "cos-bump",
            InitialFamily::File => "file",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialData {
    pub family: InitialFamily,
    pub epsilon: f64,
    pub path: Option<PathBuf>,
}

impl InitialData {
    pub fn zero() -> Self {
        InitialData::default()
    }

    pub fn cos_bump(epsilon: f64) -> Self {
        InitialData { family: InitialFamily::CosBump, epsilon, path: None }
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        InitialData { family: InitialFamily::File, epsilon: 0.0, path: Some(path.into()) }
    }
}

/// The initial potential ψ on the grid, checked so that `ω̂ + i∂∂̄ψ > 0`
/// at every cell.
///
/// Snapshot files store φ at some time; their values are taken as ψ as is.
pub fn make_initial_potential(m: &HopfModuli, grid: &GridSpec, initial: &InitialData) -> Result<Vec<f64>> {
    let phi = match initial.family {
        InitialFamily::Zero => vec![0.0; grid.len()],
        InitialFamily::CosBump => {
            let eps = initial.epsilon;
            if !eps.is_finite() {
                return Err(Error::ConfigRange {
                    key: "epsilon".into(),
                    message: format!("must be finite, got {eps}"),
                });
            }
            let k = 2.0 * std::f64::consts::PI / grid.period;
            let mut v = vec![0.0; grid.len()];
            for i in 0..grid.n_u {
                let c = eps * (k * grid.u(i)).cos();
                for j in 0..grid.n_sigma {
                    let s = grid.sigma(j);
                    v[grid.idx(i, j)] = c * s * (1.0 - s);
                }
            }
            v
        }
        InitialFamily::File => {
            let path = initial.path.as_ref().ok_or_else(|| Error::ConfigRange {
                key: "initial_path".into(),
                message: "file initial data needs a path".into(),
            })?;
            let snap = io::read_snapshot(path)?;
            snap.check_compatible(path, m, grid)?;
            snap.phi
        }
    };
    let state = FlowState::new(*m, *grid, 0.0, phi)?;
    frame_metrics(&state).map_err(|e| Error::Inadmissible(Box::new(e)))?;
    Ok(state.phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asym() -> (HopfModuli, GridSpec) {
        let m = HopfModuli::new(2.0, 4.0).unwrap();
        (m, GridSpec::for_moduli(&m, 64, 64).unwrap())
    }

    #[test]
    fn zero_is_admissible() {
        for m in [HopfModuli::round(), HopfModuli::new(1.5, 3.0).unwrap(), HopfModuli::new(1.1, 9.0).unwrap()] {
            let g = GridSpec::for_moduli(&m, 16, 16).unwrap();
            assert!(make_initial_potential(&m, &g, &InitialData::zero()).unwrap().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn small_bump_is_admissible() {
        let (m, g) = asym();
        let phi = make_initial_potential(&m, &g, &InitialData::cos_bump(0.01)).unwrap();
        assert!(phi.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn huge_bump_is_rejected() {
        let (m, g) = asym();
        let err = make_initial_potential(&m, &g, &InitialData::cos_bump(1e3)).unwrap_err();
        match err {
            Error::Inadmissible(inner) => assert!(matches!(*inner, Error::NotPositive { .. })),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn family_names_round_trip() {
        for f in [InitialFamily::Zero, InitialFamily::CosBump, InitialFamily::File] {
            assert_eq!(f.to_string().parse::<InitialFamily>().unwrap(), f);
        }
        assert!("bump".parse::<InitialFamily>().is_err());
    }
}

//! LCK metrics on class-1 primary Hopf surfaces and the Chern-Ricci flow
//! started from their ∂∂̄-class.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] solves for the potential Φ and maps between ambient points
//!   of `C² \ {0}` and the reduced cylinder coordinates `(u, σ)`.
//! * [`tensors`] evaluates ω̂, Θ, χ, Ric(χ) and the reference metrics ω_t in
//!   closed form.
//! * [`verify`] checks the tensor identities against finite differences.
//! * [`flow`] integrates the reduced parabolic Monge-Ampère equation and
//!   [`diagnostics`] monitors it.
//! * [`config`], [`io`] and [`commands`] back the `hopf-crf` binary.

pub mod commands;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fd;
pub mod flow;
pub mod geometry;
pub mod hermitian;
pub mod io;
pub mod tensors;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{
    ambient_from_reduced, deck_scale, make_moduli, reduced_from_ambient, solve_phi, z_function, AmbientPoint,
    HopfModuli, ReducedCoord,
};
pub use hermitian::{trace_pair, ComplexGradient2, Hermitian2};
pub use tensors::{
    chi_metric, hat_metric, phi_gradient, phi_hessian, reference_metric, ricci_chi, theta_form, HessianVariant,
};

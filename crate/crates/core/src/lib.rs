//! Noise-intensity ranges that stabilise the Chafee–Infante equation with
//! dynamical boundary conditions, plus a 1D Itô finite-difference simulator
//! that checks them by Lyapunov-exponent Monte Carlo.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod model;
pub mod roots;
pub mod sim;
pub mod spectral;
pub mod stability;
pub mod trace;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{
    h_inner, h_norm_sq, validate_params, DomainGeometry, HState, IntensityInterval, ModelParams,
    NoisePlacement, TheoremCase,
};

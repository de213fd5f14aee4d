//! Gaussian-state simulator for an all-optical feedforward squeezing gate.
//!
//! The crate models two-mode continuous-variable circuits built from beam
//! splitters, phase-sensitive parametric amplifiers (ideal and lossy
//! waveguide), loss channels and optical-interference feedforward, and
//! provides the calibration arithmetic used to interpret the measured
//! squeezing levels.
//!
//! Conventions: quadratures are ordered `(x1, p1, x2, p2, ...)`, `hbar = 1`
//! and `a = (x + ip)/sqrt(2)`, so the vacuum variance is `1/2` and every dB
//! figure is a ratio to that shot-noise level.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod gate;
pub mod gaussian;
pub mod opa;
pub mod par;

pub use error::{Error, Result};
pub use gate::{GateConfig, GateOutcome, SpectralModel, SweepRecord};
pub use gaussian::{Axis, GaussianChannel, GaussianState, QuadratureSelector};
pub use opa::{OpaGainLoss, OpaSpec};

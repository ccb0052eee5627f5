//! Joint antenna position and rotation optimization for zero-forcing
//! multi-user MISO downlink.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: multipath channel vectors for movable, rotatable antennas.
//! - [`zf`]: zero-forcing precoder, SINR and the closed-form ZF sum rate.
//! - [`qp`]: primal active-set solver for convex inequality-constrained QPs.
//! - [`sqp`]: sequential quadratic programming over antenna positions and
//!   rotations with a DFP curvature model and merit line search.
//! - [`experiment`]: seeded Monte-Carlo sweeps comparing the FPA, MA, RA and
//!   MRA schemes.
//! - [`cli`]: config parsing, CSV output and the `run`/`sweep`/`validate`
//!   commands behind the `mra-opt` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod qp;
pub mod sqp;
pub mod validate;
pub mod zf;

pub use channel::{AntennaLayout, PathComponent, Scenario};
pub use error::{Error, Result};

pub use experiment::{ExperimentConfig, SweepAxis, SweepResult};
pub use qp::{QpProblem, QpSolution, QpStatus};
pub use sqp::{Bounds, OptOptions, OptResult, OptVariables, Scheme};
pub use zf::PrecodingMatrix;

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier frequency used by the default experiments, Hz.
pub const DEFAULT_CARRIER_HZ: f64 = 3.0e9;

/// Wavelength for a carrier frequency in Hz.
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

//! Bohmian mechanics of light in two evanescently coupled waveguides.
//!
//! Natural units throughout: `hbar = 1`, the medium light speed is 1 and
//! energies are measured in units of the photon rest energy `m`. See
//! [`params`] for the conversion to lab units.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigenmodes;
pub mod error;
pub mod model;
pub mod opspeed;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod stationary2d;
pub mod stats;
pub mod suite;
pub mod trajectories;
pub mod wavepacket;

pub use error::{Error, Result};

//! Reordering of trapped-ion strings by rotating the trapping potential.
//!
//! The crate covers the quadratic trap model and the turn waveform
//! ([`model`]), electrode design with point charges ([`pointcharge`]),
//! classical N-ion dynamics ([`dynamics`]), turn protocols and heating
//! sweeps ([`protocols`]) and derived analyses with table export
//! ([`analysis`]). All quantities are SI unless a name says otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod numeric;
pub mod pointcharge;
pub mod protocols;

pub use error::{Error, Result};

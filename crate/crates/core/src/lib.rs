//! Bohmian trajectories of maximally entangled spin-1/2 particles crossing
//! Stern-Gerlach magnets.
//!
//! The crate builds the analytic wavepackets of a constant-gradient magnet
//! ([`physics`]), writes entangled states as weighted sign patterns in the
//! measurement bases ([`states`]), evaluates the resulting pilot-wave
//! velocity field ([`velocity`]), integrates and classifies trajectories
//! ([`dynamics`]) and runs the Bell, CHSH, Mermin and GHZ experiments over
//! Gaussian ensembles of starting points ([`experiments`]).

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod physics;
pub mod spin;
pub mod states;
pub mod velocity;

pub use error::{Error, Result};
pub use spin::{Pattern, Spin};

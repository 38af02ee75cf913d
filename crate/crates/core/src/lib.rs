//! Harmonic analysis on the sphere and the rotation group.
//!
//! The crate provides equiangular sampling grids, Wigner basis functions,
//! fast and direct generalized Fourier transforms on S² and SO(3), spectral
//! rotation-equivariant correlation, brute-force oracles for all of the
//! above, an equivariance-error harness, and a small binary container format.

pub mod correlation;
pub mod error;
pub mod gft;
pub mod grids;
pub mod harmonics;
pub mod harness;
pub mod oracle;
pub mod par;
pub mod signals;

pub use error::{Error, Result};

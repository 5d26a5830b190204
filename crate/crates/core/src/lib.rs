//! Post-selected non-Hermitian dynamics of driven, collectively dissipating qubits.

pub mod error;
pub mod numkernel;

pub use error::{Error, Result};
pub mod model;
pub mod spectral;
pub mod dynamics;
pub mod observables;
pub mod multiqubit;

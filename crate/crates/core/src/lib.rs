//! Probing non-Markovian polarization dynamics of photons through
//! generalized data-processing inequalities.

pub mod checks;
pub mod config;
pub mod coupling;
pub mod dephasing;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod optimize;
pub mod probing;
pub mod quadrature;
pub mod report;
pub mod qubit;
pub mod spectra;
pub mod tomography;

pub use error::{Error, Result};
pub use qubit::{QubitState, alpha_fidelity, trace_distance};

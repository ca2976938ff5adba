//! Associative memory on qubit networks with Hebb-type couplings: classical
//! Hopfield retrieval, exact small-register quantum dynamics, and
//! mean-field fixed points with their phase diagram.

pub mod classical;
pub mod error;
pub mod format;
pub mod meanfield;
pub mod patterns;
pub mod plot;
pub mod quantum;
pub mod sweep;

pub use error::{Error, Result};

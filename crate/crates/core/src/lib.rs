//! Correlation-induced coherence (CIC) of bipartite quantum states and its use
//! as a detector of quantum phase transitions in the spin-1/2 XXZ chain and the
//! Kitaev honeycomb model.

pub mod cic;
pub mod error;
pub mod kitaev;
pub mod optimize;
pub mod props;
pub mod quadrature;
pub mod random;
pub mod scan;
pub mod state;
pub mod tolerance;
pub mod xxz;

pub use error::{Error, Result};

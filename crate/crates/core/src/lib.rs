//! Exact operator algebra, PCUT series, extrapolation and exact
//! diagonalization for the Z3 Kitaev-Potts model.

pub mod analysis;
pub mod clusters;
pub mod cyclo;
pub mod ed;
pub mod error;
pub mod fixtures;
pub mod gme;
pub mod lattice;
pub mod meanfield;
mod optim;
pub mod pcut;
pub mod qudit;
pub mod series;

pub use cyclo::Cyclo;
pub use error::{Error, Result};

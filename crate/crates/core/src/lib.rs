//! Hecke eigensystems of weight-2 prime-level cusp forms, realized as the
//! spectra of supersingular isogeny graphs, together with numerical checks
//! of their equidistribution with respect to the p-adic Plancherel measures.

pub mod cache;
pub mod cli;
pub mod error;
pub mod ff;
pub mod lvalue;
pub mod mult;
pub mod output;
pub mod plancherel;
pub mod smooth;
pub mod spectra;
pub mod ssgraph;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};

//! Hecke eigensystems read off the spectra of the isogeny graphs.

pub mod eig;
pub mod level;
pub mod system;

pub use eig::{eig_sym, SymEigen};
pub use level::Level;
pub use system::{eigensystem, eigensystem_from_graphs, level_graphs, prime_power_lambda, EigenSystem, Form};

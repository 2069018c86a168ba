//! Supersingular j-invariants and their l-isogeny graphs.

pub mod graph;
pub mod modpoly;

pub use graph::{build_graph, supersingular_j, IsogenyGraph};
pub use modpoly::{modular_poly, ModularPolynomial};

//! Exact arithmetic substrate: prime fields and their quadratic extensions,
//! dense polynomials with root finding, integer polynomials and exact
//! characteristic polynomials, plus elementary number theory.

pub mod charpoly;
pub mod field;
pub mod intpoly;
pub mod nt;
pub mod poly;

pub use charpoly::{charpoly_exact, charpoly_exact_capped};
pub use field::{Fp2, Fq2};
pub use intpoly::IntPoly;
pub use nt::{legendre, nt_values, NtValues};
pub use poly::{roots_in_fq2, DensePoly};

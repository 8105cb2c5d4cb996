//! Exact computation of Ext charts over the finite subalgebras A(n) of the
//! mod-2 Steenrod algebra, the Koszul (Davis-Mahowald) and Atiyah-Hirzebruch
//! spectral sequences built on them, and algebraic Mahowald invariants.
//!
//! All arithmetic is exact over GF(2); every run is deterministic.

pub mod bits;
pub mod error;
pub mod milnor;
pub mod module;
pub mod koszul;
pub mod mahowald;
pub mod resolution;

pub use error::{Error, Result};

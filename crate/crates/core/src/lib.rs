//! Grassmann-valued cluster expansion for `log ∫dμ_I exp(f)` with exact Berezin
//! oracles, tree combinatorics, weighted norms and a lattice Gross–Neveu driver.

pub mod berezin;
pub mod cluster;
pub mod error;
pub mod grassmann;
pub mod gross_neveu;
pub mod harness;
pub mod lattice;
pub mod norms;
pub mod trees;

pub use error::{Error, Result};

//! Finite Grassmann algebra over an enumerated generator universe.

mod coefficients;
mod element;
mod generator;

pub use coefficients::{concat_tuples, monomial_key, signed_permutations, CoefficientSystem, EntryKey, IndexVector};
pub use element::GrassmannElement;
pub use generator::{canonicalize, canonicalize_bits, merge_sign, Family, GeneratorIndex, Monomial, Universe, ETA_OFFSET};

//! Close-packed dimers on the eleven Archimedean lattices: section generation,
//! perfect-matching enumeration, ring-exchange move catalogs, constructive
//! connectivity of the configuration space, necessity certificates, and
//! frustration-free quantum dimer models over the matching basis.

pub mod bitset;
pub mod error;
pub mod lattice;
pub mod matching;
pub mod dynamics;
pub mod moves;
pub mod qdm;
pub mod transformer;

pub use error::{Error, Result};

//! Multiscale Hodge scattering on simplicial complexes.

pub mod bundle;
pub mod cli;
pub mod complex;
pub mod dictionary;
pub mod error;
pub mod featurize;
pub mod graph;
pub mod learn;
pub mod linalg;
pub mod partition;
pub mod scattering;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};

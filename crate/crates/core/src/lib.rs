//! Dimers on superposition graphs of double circle packings, spanning trees
//! and the potential theory that links them.

pub mod error;
pub mod lattice;
pub mod packing;
pub mod kasteleyn;
pub mod potential;
pub mod sampler;
pub mod heights;
pub mod temperley;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

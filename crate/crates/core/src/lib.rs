//! Stopping-set analysis, construction and belief-propagation decoding for
//! conventional and concatenated polar codes.

pub mod concat;
pub mod decoding;
pub mod error;
pub mod graph;
pub mod nde;
pub mod polar;
pub mod rng;
pub mod sim;
pub mod stopping;

pub use error::{Error, Result};

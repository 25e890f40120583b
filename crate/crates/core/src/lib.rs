//! Exponential sums, equidistribution tests and correlation diagnostics for
//! sequences built from the intermediate growth function `x^(log^c x)`.

pub mod certificates;
pub mod cli;
pub mod difference;
pub mod dynamics;
pub mod equidistribution;
pub mod error;
pub mod expsum;
pub mod furstenberg;
pub mod growth;
pub mod precision;
pub mod report;

pub use error::{Error, Result};

//! Exclusivity-graph analysis: classical (stable set), quantum (theta body)
//! and exclusivity-principle (clique-constrained) sets of probability
//! assignments, with exact or verified certificates.

pub mod assignments;
pub mod constructions;
pub mod error;
pub mod graph;
pub mod lp;
pub mod scalar;
pub mod scenarios;
pub mod theta;

pub use error::{Error, Result};
pub use scalar::ScalarQ2;

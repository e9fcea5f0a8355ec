//! Acceleration and load-dependent electric vehicle routing.
//!
//! Travel times follow piecewise-linear arc speed profiles evaluated in
//! closed form, energy integrates a speed/acceleration/load power model
//! exactly, and routes are optimized by large neighborhood search with local
//! search and set partitioning over a pooled route repository.

pub mod energy;
pub mod error;
pub mod evaluate;
pub mod model;
pub mod oracle;
pub mod search;
pub mod split;
pub mod spp;
pub mod timetravel;

pub use error::{Error, Result};

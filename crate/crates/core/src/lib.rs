//! Exact counting, automorphism orbits, uniform sampling and pattern
//! statistics for unlabeled trees.

pub mod asymptotics;
pub mod canon;
pub mod counting;
pub mod enumeration;
pub mod error;
pub mod experiments;
pub mod orbits;
pub mod patterns;
pub mod par;
pub mod sampling;
pub mod stats;
pub mod text;
pub mod tree;

pub use error::{CensusError, Result};

//! Randomized property suites over small instances.

pub mod random;
mod suites;

pub use suites::*;

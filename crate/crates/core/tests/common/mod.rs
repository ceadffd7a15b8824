//! Shared generators and brute-force oracles for the integration tests.
//!
//! The oracles read only raw node, edge and CSV data and never call the
//! engine's matching, indexing or presentation code.

#![allow(dead_code)]

pub mod actions;
pub mod checks;
pub mod graphs;
pub mod oracle;
pub mod relational;

use rand::rngs::StdRng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

//! Country-level analysis of offshore-leak dumps.
//!
//! Records and relationships from an ICIJ-style CSV export are projected onto
//! a weighted directed [`graph::CountryNetwork`]. On top of it the crate
//! ranks countries by strength, measures the rich-club estimator against a
//! degree- and weight-preserving null ensemble, extracts the core above a
//! degree threshold and re-ranks after removing a country.
//!
//! Projection rules ([`ingest::Projection`]) and rich-club estimators
//! ([`richclub::ClubEstimator`]) are trait objects looked up by name, which
//! is how the CLI's `--mode` and `--estimator` flags select them.

pub mod cli;
pub mod core_extract;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod nullmodel;
pub mod richclub;

pub use graph::{CountryCode, CountryNetwork, UndirectedGraph, UndirectedView};

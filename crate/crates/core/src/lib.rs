//! Fair community vaccination via influence maximization on temporal
//! CBG-to-POI mobility networks.
//!
//! The crate is organized as a pipeline:
//!
//! * [`network`] holds the bipartite mobility graph, its demographic
//!   attributes, CSV ingestion and a seeded synthetic generator.
//! * [`disease`] simulates metapopulation SEIR spread on that graph and
//!   exposes the influence functions used for selection.
//! * [`select`] picks CBGs to vaccinate: greedy CELF influence maximization,
//!   its equal-treatment and age-risk-weighted variants, and the random and
//!   oldest-first baselines.
//! * [`metrics`] scores outcomes: infection reductions and KL-divergence
//!   equal-treatment / equal-outcome audits.
//! * [`experiment`] runs the strategy-by-seed matrix with persistence and
//!   exports plot-ready CSVs.

pub mod disease;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod network;
pub mod rng;
pub mod select;

pub use error::{Error, Result};

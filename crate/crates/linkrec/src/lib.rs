//! Buy-from-seller link recommendation for C2C commercial networks.
//!
//! Models a marketplace as a directed multigraph of users (each can buy and
//! sell) whose edges are individual transactions, then predicts which
//! sellers a target user will trade with next and which item each seller
//! should offer. The pipeline:
//!
//! 1. **candidates** — SimRank over the buyer side finds the target's
//!    lookalikes; their sellers, minus the target's own, form the pool
//!    ([`simrank`]);
//! 2. **scoring** — each candidate gets a category-overlap score, a
//!    volume- and rating-weighted reputation, and a rating-profile
//!    similarity ([`scoring`]);
//! 3. **fusion** — scores are min-max normalized over the pool and combined
//!    convexly into one ranking ([`scoring`]);
//! 4. **items** — every recommended seller is paired with one item:
//!    best-selling, seeded-random, or association-rule-guided ([`items`]).
//!
//! [`eval`] runs the k-fold link-prediction experiment around the pipeline,
//! [`synth`] generates seeded marketplaces with planted structure to run it
//! on, and [`config`] holds all tunables. Everything randomized derives
//! from one run seed ([`seeds`]), so every result reproduces exactly.
//!
//! Numeric code is generic over the float width via [`Real`]; `f64` is the
//! default type parameter everywhere, and the `*32`/`*64` aliases below
//! name the two concrete lanes.

pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod num;
pub mod items;
pub mod scoring;
pub mod seeds;
pub mod simrank;
pub mod synth;
#[cfg(test)]
pub(crate) mod testkit;

pub use data::{ingest_csv, RatingScale, RatingVector, Transaction};
pub use error::{Error, Result};
pub use graph::{CommercialGraph, GraphStats};
pub use num::Real;
pub use simrank::{SimRankParams, SimilarityTable};

/// Single-precision transaction record.
pub type Transaction32 = data::Transaction<f32>;
/// Double-precision transaction record (the default lane).
pub type Transaction64 = data::Transaction<f64>;
/// Single-precision commercial graph.
pub type Graph32 = graph::CommercialGraph<f32>;
/// Double-precision commercial graph.
pub type Graph64 = graph::CommercialGraph<f64>;
/// Single-precision similarity table.
pub type SimilarityTable32 = simrank::SimilarityTable<f32>;
/// Double-precision similarity table.
pub type SimilarityTable64 = simrank::SimilarityTable<f64>;

// Adjacency-matrix index arithmetic reads clearer with explicit loops.
#![allow(clippy::needless_range_loop)]

//! Benchmarking harness for structure learning of probabilistic graphical
//! models.
//!
//! The crate covers the full loop of a simulation study: ground-truth graph
//! generation ([`netgen`]), parameter and data sampling ([`modelgen`]),
//! native structure-learning algorithms plus an external-plugin protocol
//! ([`learners`]), mixed-graph comparison metrics ([`metrics`]), result
//! aggregation with MCMC diagnostics ([`evalreport`]), bit-exact file
//! formats ([`io`]), and a config-driven parallel job runner with
//! content-addressed caching ([`runner`]).

pub mod citests;
pub mod error;
pub mod evalreport;
pub mod graphs;
pub mod io;
pub mod learners;
pub mod linalg;
pub mod metrics;
pub mod modelgen;
pub mod netgen;
pub mod runner;
pub mod scores;
pub mod seeding;
pub mod special;

pub use error::Error;
pub use graphs::{EdgeKind, LabeledGraph};
pub use modelgen::DataMatrix;

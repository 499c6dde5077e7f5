//! Poor-village identification from village coordinates.
//!
//! Villages closer than a distance threshold are linked into a graph
//! ([`geo::build_graph`]). Each village gets a Centrality2Vec embedding that captures
//! how central its neighbourhood is ([`c2v`]), and a two-layer distance-decayed graph
//! convolution classifies villages as poor or non-poor ([`lgdc`]). [`analysis`] holds the
//! descriptive statistics, [`eval`] the metrics and experiment harness, and
//! [`pipeline`] the run-directory stages behind the CLI.

pub mod analysis;
pub mod c2v;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod geo;
pub mod lgdc;
pub mod linalg;
pub mod pipeline;
pub mod scalar;

pub use config::RunConfig;
pub use data::{load_csv, write_csv, Dataset, Label, VillageRecord};
pub use error::{Error, Result};
pub use geo::{build_graph, geodesic_km, SpatialGraph};
pub use scalar::Scalar;

/// Embedding matrix in double precision, as used by the pipeline.
pub type Embedding = c2v::EmbeddingMatrix<f64>;
/// Single-precision embedding matrix.
pub type Embedding32 = c2v::EmbeddingMatrix<f32>;
/// Classifier in double precision, as used by the pipeline.
pub type Model = lgdc::LgdcModel<f64>;
pub type Model32 = lgdc::LgdcModel<f32>;
pub type Matrix = linalg::Matrix<f64>;

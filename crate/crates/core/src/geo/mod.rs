//! Geodesic distances and the village graph built from them.

pub mod geodesic;
mod graph;

pub use geodesic::{geodesic_km, haversine_km};
pub use graph::{
    build_graph, build_graph_with, graph_stats, DistanceModel, Edge, GraphStats, SpatialGraph,
};

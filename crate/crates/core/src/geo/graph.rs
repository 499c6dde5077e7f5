//! The distance-thresholded village graph.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::geodesic::{geodesic_km, haversine_km};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Lower bound on the length of one degree of latitude anywhere on WGS-84 (km).
/// The meridian arc between two parallels is the shortest path between them,
/// so pairs further apart in latitude than `d / MIN_KM_PER_DEG_LAT` can be skipped.
const MIN_KM_PER_DEG_LAT: f64 = 110.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceModel {
    #[default]
    Ellipsoidal,
    Spherical,
}

impl DistanceModel {
    pub fn distance_km(self, a: (f64, f64), b: (f64, f64)) -> f64 {
        match self {
            DistanceModel::Ellipsoidal => geodesic_km(a, b),
            DistanceModel::Spherical => haversine_km(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub dist_km: f64,
}

/// Undirected graph with per-edge distances. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGraph {
    n: usize,
    threshold_km: f64,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub average_degree: f64,
    pub sparsity: f64,
}

impl SpatialGraph {
    /// Builds a graph from an edge list, checking every structural invariant.
    pub fn from_edges(n: usize, threshold_km: f64, mut edges: Vec<Edge>) -> Result<Self> {
        for e in &mut edges {
            if e.i > e.j {
                std::mem::swap(&mut e.i, &mut e.j);
            }
            if e.i == e.j {
                return Err(Error::invalid(format!("self-loop at node {}", e.i)));
            }
            if e.j >= n {
                return Err(Error::invalid(format!(
                    "node index {} out of range for n = {n}",
                    e.j
                )));
            }
            if !(e.dist_km > 0.0 && e.dist_km < threshold_km) {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) distance {} outside (0, {threshold_km})",
                    e.i, e.j, e.dist_km
                )));
            }
        }
        edges.sort_by_key(|a| (a.i, a.j));
        if let Some(w) = edges
            .windows(2)
            .find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j))
        {
            return Err(Error::invalid(format!(
                "duplicate edge ({}, {})",
                w[0].i, w[0].j
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.i].push((e.j, e.dist_km));
            adjacency[e.j].push((e.i, e.dist_km));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(j, _)| j);
        }
        Ok(SpatialGraph {
            n,
            threshold_km,
            edges,
            adjacency,
        })
    }

    pub fn edgeless(n: usize) -> Self {
        SpatialGraph {
            n,
            threshold_km: 0.0,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn threshold_km(&self) -> f64 {
        self.threshold_km
    }

    /// Edges with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbours of `i` with distances, sorted by neighbour index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn stats(&self) -> Result<GraphStats> {
        graph_stats(self)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 24);
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {:.6}", e.i, e.j, e.dist_km);
        }
        out
    }

    /// Parses the `i j dist_km` dump. Node count and threshold are not part of the
    /// format, so the caller supplies them.
    ///
    /// The dump keeps six decimals, so a distance just below the threshold (or just above
    /// zero) can be printed as the bound itself; such values are moved back inside
    /// `(0, threshold)` by one ulp.
    pub fn parse_edge_list(n: usize, threshold_km: f64, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: &str| Error::Parse {
                line: idx + 1,
                msg: format!("{msg}: `{line}`"),
            };
            let mut it = line.split_whitespace();
            let (Some(i), Some(j), Some(d), None) = (it.next(), it.next(), it.next(), it.next())
            else {
                return Err(perr("expected `i j dist_km`"));
            };
            let mut dist_km: f64 = d.parse().map_err(|_| perr("bad distance"))?;
            if dist_km == threshold_km {
                dist_km = threshold_km.next_down();
            } else if dist_km == 0.0 {
                dist_km = f64::MIN_POSITIVE;
            }
            edges.push(Edge {
                i: i.parse().map_err(|_| perr("bad node index"))?,
                j: j.parse().map_err(|_| perr("bad node index"))?,
                dist_km,
            });
        }
        SpatialGraph::from_edges(n, threshold_km, edges)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }

    pub fn read_edge_list(n: usize, threshold_km: f64, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SpatialGraph::parse_edge_list(n, threshold_km, &text)
    }
}

/// Connects every pair of villages strictly closer than `d` km.
pub fn build_graph(dataset: &Dataset, d: f64) -> Result<SpatialGraph> {
    build_graph_with(&dataset.coords(), d, DistanceModel::Ellipsoidal, true)
}

/// `prefilter` enables the latitude-band pruning; the result is identical either way.
pub fn build_graph_with(
    coords: &[(f64, f64)],
    d: f64,
    model: DistanceModel,
    prefilter: bool,
) -> Result<SpatialGraph> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::invalid(format!(
            "distance threshold must be positive, got {d}"
        )));
    }
    let n = coords.len();
    let consider = |i: usize, j: usize| -> Option<Edge> {
        let dist = model.distance_km(coords[i], coords[j]);
        (dist > 0.0 && dist < d).then_some(Edge {
            i: i.min(j),
            j: i.max(j),
            dist_km: dist,
        })
    };

    let mut edges: Vec<Edge> = if prefilter {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| coords[a].0.total_cmp(&coords[b].0).then(a.cmp(&b)));
        // the spherical model uses a slightly different scale, so widen the band a little
        let band_deg = d / MIN_KM_PER_DEG_LAT * 1.01;
        (0..n)
            .into_par_iter()
            .flat_map_iter(|pos| {
                let i = order[pos];
                order[pos + 1..]
                    .iter()
                    .take_while(move |&&j| coords[j].0 - coords[i].0 <= band_deg)
                    .filter_map(move |&j| consider(i, j))
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (i + 1..n).filter_map(move |j| consider(i, j)))
            .collect()
    };
    edges.sort_by_key(|a| (a.i, a.j));
    SpatialGraph::from_edges(n, d, edges)
}

pub fn graph_stats(g: &SpatialGraph) -> Result<GraphStats> {
    let n = g.n();
    if n < 2 {
        return Err(Error::invalid(format!("sparsity undefined for n = {n}")));
    }
    let m = g.edge_count() as f64;
    let nf = n as f64;
    Ok(GraphStats {
        nodes: n,
        edges: g.edge_count(),
        average_degree: 2.0 * m / nf,
        sparsity: 2.0 * m / (nf * (nf - 1.0)),
    })
}

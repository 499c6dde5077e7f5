//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use village_graph::c2v::CentralitySequence;
use village_graph::geo::{Edge, SpatialGraph};
use village_graph::lgdc::LgdcModel;
use village_graph::linalg::Matrix;

/// Erdős–Rényi graph with edge lengths inside a 5 km threshold.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> SpatialGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push(Edge {
                    i,
                    j,
                    dist_km: rng.gen_range(0.05..4.95),
                });
            }
        }
    }
    SpatialGraph::from_edges(n, 5.0, edges).unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, lo: f64, rng: &mut impl Rng) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(lo..1.0))
}

/// For each k, delete nodes with fewer than k live neighbours until nothing changes;
/// a node's coreness is the largest k it survives.
pub fn brute_coreness(g: &SpatialGraph) -> Vec<usize> {
    let n = g.n();
    let mut core = vec![0; n];
    for k in 1..=n {
        let mut alive = vec![true; n];
        loop {
            let doomed: Vec<usize> = (0..n)
                .filter(|&i| {
                    alive[i] && g.neighbors(i).iter().filter(|&&(j, _)| alive[j]).count() < k
                })
                .collect();
            if doomed.is_empty() {
                break;
            }
            for i in doomed {
                alive[i] = false;
            }
        }
        if !alive.iter().any(|&a| a) {
            break;
        }
        for i in 0..n {
            if alive[i] {
                core[i] = k;
            }
        }
    }
    core
}

pub fn seq(v: &[u32]) -> CentralitySequence {
    CentralitySequence::new(v.to_vec()).unwrap()
}

pub fn random_seq(rng: &mut impl Rng, max_len: usize, max_val: u32) -> CentralitySequence {
    let len = rng.gen_range(1..=max_len);
    seq(&(0..len)
        .map(|_| rng.gen_range(1..=max_val))
        .collect::<Vec<_>>())
}

/// Every target element against every source element.
pub fn brute_cost(from: &CentralitySequence, to: &CentralitySequence) -> f64 {
    to.values()
        .iter()
        .map(|&t| {
            from.values()
                .iter()
                .map(|&s| (t.max(s) as f64) / (t.min(s) as f64) - 1.0)
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// `D⁻¹ + Â_α` as a dense matrix, written out entry by entry.
pub fn dense_operator(g: &SpatialGraph, alpha: f64) -> Vec<Vec<f64>> {
    let n = g.n();
    let deg: Vec<f64> = (0..n).map(|i| g.degree(i) as f64).collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 1.0 / deg[i].max(1.0);
    }
    for e in g.edges() {
        let w = alpha.powf(e.dist_km) / (deg[e.i].sqrt() * deg[e.j].sqrt());
        a[e.i][e.j] += w;
        a[e.j][e.i] += w;
    }
    a
}

fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, k) = (a.len(), b[0].len(), b.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum())
                .collect()
        })
        .collect()
}

fn to_dense(m: &Matrix<f64>) -> Vec<Vec<f64>> {
    m.rows_iter().map(|r| r.to_vec()).collect()
}

pub fn dense_forward(
    g: &SpatialGraph,
    alpha: f64,
    model: &LgdcModel<f64>,
    h: &Matrix<f64>,
) -> Vec<Vec<f64>> {
    let a = dense_operator(g, alpha);
    let mut x = to_dense(h);
    let last = model.layers.len() - 1;
    for (l, p) in model.layers.iter().enumerate() {
        let mut z = dense_mul(&dense_mul(&a, &x), &to_dense(&p.w));
        for row in &mut z {
            for (v, b) in row.iter_mut().zip(&p.b) {
                *v += b;
                if l < last {
                    *v = v.max(0.0);
                }
            }
        }
        x = z;
    }
    x
}

/// Symmetric-normalised neighbour sum as a GCN layer computes it.
pub fn plain_gcn_aggregate(g: &SpatialGraph, h: &Matrix<f64>, i: usize) -> Vec<f64> {
    let mut out = vec![0.0; h.cols()];
    for &(j, _) in g.neighbors(i) {
        let norm = 1.0 / ((g.degree(i) as f64).sqrt() * (g.degree(j) as f64).sqrt());
        for (o, &x) in out.iter_mut().zip(h.row(j)) {
            *o += norm * x;
        }
    }
    out
}

pub fn all_pairs_auroc(scores: &[f64], positive: &[bool]) -> f64 {
    let pos: Vec<f64> = (0..scores.len())
        .filter(|&i| positive[i])
        .map(|i| scores[i])
        .collect();
    let neg: Vec<f64> = (0..scores.len())
        .filter(|&i| !positive[i])
        .map(|i| scores[i])
        .collect();
    let mut total = 0.0;
    for &p in &pos {
        for &q in &neg {
            total += if p > q {
                1.0
            } else if p == q {
                0.5
            } else {
                0.0
            };
        }
    }
    total / (pos.len() * neg.len()) as f64
}

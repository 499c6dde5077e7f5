//! Neighbourhood centrality sequences and the cost between them.

use crate::error::{Error, Result};
use crate::geo::SpatialGraph;

/// Sorted, shifted (+1) centralities of a node's 1-hop neighbourhood. All values are ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CentralitySequence(Vec<u32>);

impl CentralitySequence {
    /// Sorts the values; rejects empty input and zeros.
    pub fn new(mut values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("centrality sequence must be non-empty"));
        }
        if values.contains(&0) {
            return Err(Error::invalid(
                "centrality sequence values must be >= 1 (apply the +1 shift)",
            ));
        }
        values.sort_unstable();
        Ok(CentralitySequence(values))
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sequence of `c[j] + 1` over the neighbours of `i`, plus `i` itself when `include_self`.
/// An isolated node without self inclusion gets its own value so the sequence is never empty.
pub fn centrality_sequence(
    g: &SpatialGraph,
    c: &[usize],
    i: usize,
    include_self: bool,
) -> CentralitySequence {
    let shift = |v: usize| u32::try_from(v + 1).unwrap_or(u32::MAX);
    let mut values: Vec<u32> = g.neighbors(i).iter().map(|&(j, _)| shift(c[j])).collect();
    if include_self || values.is_empty() {
        values.push(shift(c[i]));
    }
    values.sort_unstable();
    CentralitySequence(values)
}

pub fn all_sequences(g: &SpatialGraph, c: &[usize], include_self: bool) -> Vec<CentralitySequence> {
    (0..g.n())
        .map(|i| centrality_sequence(g, c, i, include_self))
        .collect()
}

/// `max(a, b) / min(a, b) - 1`. Both values must be at least 1.
pub fn element_cost(a: f64, b: f64) -> Result<f64> {
    if !(a >= 1.0 && b >= 1.0) {
        return Err(Error::invalid(format!(
            "element cost needs values >= 1, got ({a}, {b})"
        )));
    }
    Ok(ratio_cost(a, b))
}

#[inline]
fn ratio_cost(a: f64, b: f64) -> f64 {
    a.max(b) / a.min(b) - 1.0
}

/// Cost of changing `from` into `to`: for each element of `to`, the cheapest element of
/// `from`, summed in the order of `to`. Directed; `cost(s, s) == 0`.
///
/// Both sequences are sorted, so the cheapest partner of an element is its predecessor or
/// successor in `from`; a single merge pass finds it.
pub fn sequence_cost(from: &CentralitySequence, to: &CentralitySequence) -> f64 {
    let src = from.values();
    let mut p = 0;
    let mut total = 0.0;
    for &target in to.values() {
        while p + 1 < src.len() && src[p + 1] <= target {
            p += 1;
        }
        let t = target as f64;
        let mut best = ratio_cost(t, src[p] as f64);
        if src[p] < target {
            if let Some(&next) = src.get(p + 1) {
                best = best.min(ratio_cost(t, next as f64));
            }
        }
        total += best;
    }
    total
}

/// Classical alignment DTW between two sequences with the ratio element cost.
/// Not the default cost; available for comparison.
pub fn dtw_cost(a: &CentralitySequence, b: &CentralitySequence) -> f64 {
    let (x, y) = (a.values(), b.values());
    let m = y.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for &xi in x {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let c = ratio_cost(xi as f64, y[j - 1] as f64);
            cur[j] = c + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

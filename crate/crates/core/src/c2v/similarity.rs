use rayon::prelude::*;

use super::sequence::{dtw_cost, sequence_cost, CentralitySequence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostKind {
    /// Nearest-element sum (the default).
    #[default]
    NearestElement,
    /// Classical alignment DTW.
    Dtw,
}

impl CostKind {
    pub fn cost(self, anchor: &CentralitySequence, other: &CentralitySequence) -> f64 {
        match self {
            CostKind::NearestElement => sequence_cost(anchor, other),
            CostKind::Dtw => dtw_cost(anchor, other),
        }
    }
}

/// Top-K most similar nodes per node, for one centrality measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityGraph {
    pub k: usize,
    neighbors: Vec<Vec<usize>>,
}

impl SimilarityGraph {
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn lists(&self) -> &[Vec<usize>] {
        &self.neighbors
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimilarityOptions {
    pub cost: CostKind,
    /// Approximate mode: only compare nodes whose own shifted centrality differs by at
    /// most this much. `None` compares all pairs (exact).
    pub band: Option<u32>,
}

/// For each node `i`, the `k` nodes `j != i` with the smallest `cost(S_i, S_j)`,
/// ties broken by ascending index. Lists are capped at `n - 1` entries.
pub fn build_similarity_graph(
    sequences: &[CentralitySequence],
    k: usize,
) -> Result<SimilarityGraph> {
    build_similarity_graph_with(sequences, k, None, SimilarityOptions::default())
}

/// `self_values` (the node's own shifted centrality) is required when a band is set.
pub fn build_similarity_graph_with(
    sequences: &[CentralitySequence],
    k: usize,
    self_values: Option<&[u32]>,
    opts: SimilarityOptions,
) -> Result<SimilarityGraph> {
    if k == 0 {
        return Err(Error::invalid("top-K needs K >= 1"));
    }
    if opts.band.is_some() && self_values.map(|v| v.len()) != Some(sequences.len()) {
        return Err(Error::invalid(
            "banded similarity needs one self value per node",
        ));
    }
    let n = sequences.len();
    let neighbors = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut scored: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .filter(|&j| match (opts.band, self_values) {
                    (Some(b), Some(v)) => v[i].abs_diff(v[j]) <= b,
                    _ => true,
                })
                .map(|j| (opts.cost.cost(&sequences[i], &sequences[j]), j))
                .collect();
            let take = k.min(scored.len());
            let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if take < scored.len() && take > 0 {
                scored.select_nth_unstable_by(take - 1, by);
                scored.truncate(take);
            }
            scored.sort_by(by);
            scored.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    Ok(SimilarityGraph { k, neighbors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seqs(v: &[&[u32]]) -> Vec<CentralitySequence> {
        v.iter()
            .map(|s| CentralitySequence::new(s.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn identical_nodes_tie_break_by_index() {
        let s = seqs(&[&[3u32, 3, 3][..]; 6]);
        let g = build_similarity_graph(&s, 2).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbors(5), &[0, 1]);
    }

    #[test]
    fn capped_at_n_minus_one() {
        let s = seqs(&[&[1], &[2], &[3]]);
        let g = build_similarity_graph(&s, 5).unwrap();
        for i in 0..3 {
            assert_eq!(g.neighbors(i).len(), 2);
            assert!(!g.neighbors(i).contains(&i));
        }
        assert!(build_similarity_graph(&s, 0).is_err());
    }

    #[test]
    fn picks_closest() {
        let s = seqs(&[&[2], &[9], &[3], &[8]]);
        let g = build_similarity_graph(&s, 1).unwrap();
        assert_eq!(g.neighbors(0), &[2]);
        assert_eq!(g.neighbors(1), &[3]);
    }

    #[test]
    fn band_restricts_candidates() {
        let s = seqs(&[&[2], &[9], &[3], &[8]]);
        let own = [2, 9, 3, 8];
        let opts = SimilarityOptions {
            band: Some(1),
            ..Default::default()
        };
        let g = build_similarity_graph_with(&s, 3, Some(&own), opts).unwrap();
        assert_eq!(g.neighbors(0), &[2]);
        assert_eq!(g.neighbors(3), &[1]);
    }
}

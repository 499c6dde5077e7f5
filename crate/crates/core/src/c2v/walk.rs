use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::similarity::SimilarityGraph;
use crate::error::{Error, Result};

/// Uniform random-walk transitions over per-node successor sets.
///
/// A node with no successors restarts the walk at a uniformly random node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    successors: Vec<Vec<usize>>,
}

impl Transition {
    /// Successor lists are sorted and deduplicated.
    pub fn from_lists(mut successors: Vec<Vec<usize>>) -> Result<Self> {
        let n = successors.len();
        for list in &mut successors {
            list.sort_unstable();
            list.dedup();
            if list.last().is_some_and(|&j| j >= n) {
                return Err(Error::invalid("transition successor out of range"));
            }
        }
        Ok(Transition { successors })
    }

    pub fn n(&self) -> usize {
        self.successors.len()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.successors[i]
    }

    /// Row `i` of the transition matrix as (node, probability) pairs. Sums to 1; an empty
    /// successor set yields the uniform restart distribution.
    pub fn distribution(&self, i: usize) -> Vec<(usize, f64)> {
        let succ = &self.successors[i];
        if succ.is_empty() {
            let p = 1.0 / self.n() as f64;
            (0..self.n()).map(|j| (j, p)).collect()
        } else {
            let p = 1.0 / succ.len() as f64;
            succ.iter().map(|&j| (j, p)).collect()
        }
    }

    fn step(&self, i: usize, rng: &mut impl Rng) -> usize {
        let succ = &self.successors[i];
        if succ.is_empty() {
            rng.gen_range(0..self.n())
        } else {
            succ[rng.gen_range(0..succ.len())]
        }
    }
}

/// Walks over the union of both similarity graphs: every node in
/// `N_degree(i) ∪ N_core(i)` gets probability `1 / |N_degree(i) ∪ N_core(i)|`.
pub fn combined_transition(
    sim_degree: &SimilarityGraph,
    sim_core: &SimilarityGraph,
) -> Result<Transition> {
    if sim_degree.n() != sim_core.n() {
        return Err(Error::Shape(
            "similarity graphs cover different node counts".into(),
        ));
    }
    let lists = (0..sim_degree.n())
        .map(|i| {
            sim_degree
                .neighbors(i)
                .iter()
                .chain(sim_core.neighbors(i))
                .copied()
                .collect()
        })
        .collect();
    Transition::from_lists(lists)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCorpus {
    pub walk_length: usize,
    pub sequences: Vec<Vec<usize>>,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

/// `walks_per_node` walks of `length` nodes from every node, ordered round by round.
/// Walk `w` draws from its own ChaCha stream, so the corpus depends only on `seed`.
pub fn random_walks(
    t: &Transition,
    walks_per_node: usize,
    length: usize,
    seed: u64,
) -> Result<WalkCorpus> {
    if walks_per_node == 0 || length < 2 {
        return Err(Error::invalid(
            "random walks need walks_per_node >= 1 and length >= 2",
        ));
    }
    let n = t.n();
    let sequences = (0..walks_per_node * n)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            let mut walk = Vec::with_capacity(length);
            let mut cur = w % n;
            walk.push(cur);
            for _ in 1..length {
                cur = t.step(cur, &mut rng);
                walk.push(cur);
            }
            walk
        })
        .collect();
    Ok(WalkCorpus {
        walk_length: length,
        sequences,
    })
}

//! Centrality2Vec: node embeddings that place villages with similar neighbourhood
//! centrality close together, independent of whether they are connected.
//!
//! Pipeline: degree and k-core centrality → per-node neighbourhood sequences →
//! top-K similarity graph per measure → uniform walks over the union of both graphs →
//! full-softmax skip-gram.

mod embedding;
mod sequence;
mod similarity;
mod skipgram;
mod walk;

pub use embedding::EmbeddingMatrix;
pub use sequence::{
    all_sequences, centrality_sequence, dtw_cost, element_cost, sequence_cost, CentralitySequence,
};
pub use similarity::{
    build_similarity_graph, build_similarity_graph_with, CostKind, SimilarityGraph,
    SimilarityOptions,
};
pub use skipgram::{
    center_loss_and_grad, context_distribution, cooccurrence, corpus_loss, init_embeddings,
    pair_loss, pair_loss_and_grad, skipgram_train, CoOccurrence, SkipGramConfig, SkipGramReport,
};
pub use walk::{combined_transition, random_walks, Transition, WalkCorpus};

use crate::analysis::CentralityProfile;
use crate::error::Result;
use crate::geo::SpatialGraph;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Centrality2VecConfig {
    pub top_k: usize,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub include_self: bool,
    pub similarity: SimilarityOptions,
    pub skipgram: SkipGramConfig,
}

impl Default for Centrality2VecConfig {
    fn default() -> Self {
        Centrality2VecConfig {
            top_k: 10,
            walks_per_node: 10,
            walk_length: 80,
            include_self: true,
            similarity: SimilarityOptions::default(),
            skipgram: SkipGramConfig::default(),
        }
    }
}

/// Intermediate products of one embedding run, kept for inspection and tests.
#[derive(Debug, Clone)]
pub struct Centrality2VecOutput<T> {
    pub profile: CentralityProfile,
    pub sim_degree: SimilarityGraph,
    pub sim_core: SimilarityGraph,
    pub transition: Transition,
    pub corpus: WalkCorpus,
    pub embedding: EmbeddingMatrix<T>,
    pub report: SkipGramReport,
}

pub fn centrality2vec<T: Scalar>(
    g: &SpatialGraph,
    cfg: &Centrality2VecConfig,
) -> Result<Centrality2VecOutput<T>> {
    let profile = CentralityProfile::of(g);
    let similarity = |c: &[usize]| {
        let seqs = all_sequences(g, c, cfg.include_self);
        let own: Vec<u32> = c.iter().map(|&v| (v + 1) as u32).collect();
        build_similarity_graph_with(&seqs, cfg.top_k, Some(&own), cfg.similarity)
    };
    let sim_degree = similarity(&profile.degree)?;
    let sim_core = similarity(&profile.coreness)?;
    let transition = combined_transition(&sim_degree, &sim_core)?;
    let corpus = random_walks(
        &transition,
        cfg.walks_per_node,
        cfg.walk_length,
        cfg.skipgram.seed,
    )?;
    let (embedding, report) = skipgram_train(&corpus, g.n(), &cfg.skipgram)?;
    Ok(Centrality2VecOutput {
        profile,
        sim_degree,
        sim_core,
        transition,
        corpus,
        embedding,
        report,
    })
}

/// Just the embedding matrix.
pub fn embed<T: Scalar>(
    g: &SpatialGraph,
    cfg: &Centrality2VecConfig,
) -> Result<EmbeddingMatrix<T>> {
    centrality2vec(g, cfg).map(|o| o.embedding)
}

//! Walk-based node embeddings: DeepWalk, Node2vec and Walklets.
//!
//! Node tokens are node indices, so the target (node 0 of an extracted graph)
//! starts from the same seeded vector in every graph.

use super::skipgram::{self, SkipGramConfig, SkipGramModel};
use super::walks::{random_walks, WalkBias, WalkCorpus};
use super::{DeepWalkConfig, Node2vecConfig, WalkletsConfig};
use crate::graph::ConvGraph;
use crate::Result;

/// Per-node vectors in node order; nodes filtered from the vocabulary get
/// zero vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeVectors {
    pub dimensions: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl NodeVectors {
    fn from_model(model: &SkipGramModel, n: usize) -> Self {
        let vectors = (0..n)
            .map(|v| model.vector_f64(v as u32).unwrap_or_else(|| vec![0.0; model.dimensions]))
            .collect();
        NodeVectors {
            dimensions: model.dimensions,
            vectors,
        }
    }

    fn concat(parts: Vec<NodeVectors>) -> Self {
        let n = parts.first().map_or(0, |p| p.vectors.len());
        let dimensions = parts.iter().map(|p| p.dimensions).sum();
        let vectors = (0..n)
            .map(|v| parts.iter().flat_map(|p| p.vectors[v].iter().copied()).collect())
            .collect();
        NodeVectors { dimensions, vectors }
    }
}

fn fit(corpus: &WalkCorpus, n: usize, cfg: &SkipGramConfig) -> Result<NodeVectors> {
    let model = skipgram::train(&corpus.walks, cfg)?;
    Ok(NodeVectors::from_model(&model, n))
}

pub fn deepwalk_nodes(g: &ConvGraph, cfg: &DeepWalkConfig, seed: u64) -> Result<NodeVectors> {
    cfg.validate()?;
    let corpus = random_walks(g, cfg.walk_number, cfg.walk_length, WalkBias::Uniform, seed)?;
    fit(&corpus, g.node_count(), &cfg.skipgram(seed))
}

pub fn node2vec_nodes(g: &ConvGraph, cfg: &Node2vecConfig, seed: u64) -> Result<NodeVectors> {
    cfg.validate()?;
    let bias = WalkBias::Node2vec { p: cfg.p, q: cfg.q };
    let corpus = random_walks(g, cfg.walk_number, cfg.walk_length, bias, seed)?;
    fit(&corpus, g.node_count(), &cfg.skipgram(seed))
}

/// Scale-k corpus: every k-th node of each walk, for each of the k offsets.
pub fn walklet_corpus(walks: &[Vec<u32>], k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for w in walks {
        for offset in 0..k.min(w.len()) {
            out.push(w[offset..].iter().step_by(k).copied().collect());
        }
    }
    out
}

pub fn walklets_nodes(g: &ConvGraph, cfg: &WalkletsConfig, seed: u64) -> Result<NodeVectors> {
    cfg.validate()?;
    let corpus = random_walks(g, cfg.walk_number, cfg.walk_length, WalkBias::Uniform, seed)?;
    let mut parts = Vec::with_capacity(cfg.window_size);
    for k in 1..=cfg.window_size {
        let scaled = WalkCorpus {
            walks: walklet_corpus(&corpus.walks, k),
            origins: Vec::new(),
            fingerprint: corpus.fingerprint,
        };
        let sg = SkipGramConfig {
            seed: crate::util::stable_hash(&[&seed.to_le_bytes(), &(k as u64).to_le_bytes()]),
            ..cfg.skipgram(seed)
        };
        parts.push(fit(&scaled, g.node_count(), &sg)?);
    }
    Ok(NodeVectors::concat(parts))
}

pub fn deepwalk(g: &ConvGraph, cfg: &DeepWalkConfig, seed: u64) -> Result<Vec<f64>> {
    Ok(deepwalk_nodes(g, cfg, seed)?.vectors.swap_remove(g.target()))
}

pub fn node2vec(g: &ConvGraph, cfg: &Node2vecConfig, seed: u64) -> Result<Vec<f64>> {
    Ok(node2vec_nodes(g, cfg, seed)?.vectors.swap_remove(g.target()))
}

pub fn walklets(g: &ConvGraph, cfg: &WalkletsConfig, seed: u64) -> Result<Vec<f64>> {
    Ok(walklets_nodes(g, cfg, seed)?.vectors.swap_remove(g.target()))
}

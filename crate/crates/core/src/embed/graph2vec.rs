//! Graph2vec: Weisfeiler-Lehman subgraph tokens and a PV-DBOW document model
//! trained jointly over a corpus of graphs.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::skipgram::{draw_negatives, init_vector, sgns_step, LrSchedule, Vocab};
use super::Graph2vecConfig;
use crate::features::measures::undirected_lists;
use crate::graph::ConvGraph;
use crate::util::derived_rng;
use crate::{Error, Result};

/// Initial node labels for WL relabeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum NodeLabels {
    /// Author identifiers.
    #[default]
    AuthorId,
    /// Degree in the undirected collapse.
    Degree,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubgraphToken {
    pub iteration: usize,
    pub label: String,
}

/// Rooted-subgraph tokens for every node and iteration 0..=wl_iterations.
pub fn wl_tokens(g: &ConvGraph, wl_iterations: usize, labels: NodeLabels) -> Vec<SubgraphToken> {
    let adj = undirected_lists(g);
    let mut current: Vec<String> = match labels {
        NodeLabels::AuthorId => g.nodes().to_vec(),
        NodeLabels::Degree => adj.iter().map(|l| l.len().to_string()).collect(),
    };
    let mut out: Vec<SubgraphToken> = current
        .iter()
        .map(|l| SubgraphToken {
            iteration: 0,
            label: l.clone(),
        })
        .collect();
    for it in 1..=wl_iterations {
        let next: Vec<String> = (0..current.len())
            .map(|v| {
                let mut nb: Vec<&str> = adj[v].iter().map(|&u| current[u].as_str()).collect();
                nb.sort_unstable();
                let mut h = Sha256::new();
                h.update(current[v].as_bytes());
                for l in nb {
                    h.update([0u8]);
                    h.update(l.as_bytes());
                }
                let digest = h.finalize();
                digest[..8].iter().map(|b| format!("{b:02x}")).collect()
            })
            .collect();
        out.extend(next.iter().map(|l| SubgraphToken {
            iteration: it,
            label: l.clone(),
        }));
        current = next;
    }
    out
}

/// Document vectors for each graph, in corpus order.
pub fn graph2vec(graphs: &[ConvGraph], cfg: &Graph2vecConfig, seed: u64) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    if graphs.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    // intern tokens in first-seen order
    let mut ids: HashMap<SubgraphToken, u32> = HashMap::new();
    let docs: Vec<Vec<u32>> = graphs
        .iter()
        .map(|g| {
            wl_tokens(g, cfg.wl_iterations, cfg.labels)
                .into_iter()
                .map(|t| {
                    let next = ids.len() as u32;
                    *ids.entry(t).or_insert(next)
                })
                .collect()
        })
        .collect();
    let vocab = Vocab::build(docs.iter().map(Vec::as_slice), cfg.min_count)?;
    let d = cfg.dimensions;
    let mut doc_vecs: Vec<Vec<f32>> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| init_vector(seed, &doc_key(g, i), d).collect())
        .collect();
    if cfg.epochs > 0 {
        let encoded: Vec<Vec<usize>> = docs.iter().map(|doc| vocab.encode(doc)).collect();
        let noise = vocab.noise();
        let keep = vocab.keep_probabilities(cfg.down_sampling);
        let mut output = vec![0f32; vocab.len() * d];
        let total: usize = encoded.iter().map(Vec::len).sum();
        let schedule = LrSchedule::new(cfg.learning_rate, 1e-4, cfg.epochs * total);
        let mut rng = derived_rng(seed, &[b"graph2vec"]);
        let mut scratch = vec![0f32; d];
        let mut negs = Vec::with_capacity(cfg.negative);
        let mut step = 0;
        for _ in 0..cfg.epochs {
            for (doc, u) in encoded.iter().zip(doc_vecs.iter_mut()) {
                let lr = schedule.at(step) as f32;
                step += doc.len();
                for &t in doc {
                    if keep[t] < 1.0 && rng.random::<f64>() >= keep[t] {
                        continue;
                    }
                    draw_negatives(&noise, &mut rng, cfg.negative, t, &mut negs);
                    sgns_step(u, &mut output, d, t, &negs, lr, &mut scratch);
                }
            }
        }
    }
    let out: Vec<Vec<f64>> = doc_vecs
        .into_iter()
        .map(|v| v.into_iter().map(f64::from).collect())
        .collect();
    if out.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Spectral("graph2vec training diverged".into()));
    }
    Ok(out)
}

/// Initialization key: the targeted message id, or the corpus position for
/// graphs without one.
fn doc_key(g: &ConvGraph, i: usize) -> String {
    if g.meta().message.is_empty() {
        format!("#{i}")
    } else {
        g.meta().message.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::skipgram::cosine;
    use crate::graph::test_graphs::*;
    use std::collections::HashSet;

    fn multiset(mut t: Vec<SubgraphToken>) -> Vec<SubgraphToken> {
        t.sort();
        t
    }

    #[test]
    fn isomorphic_graphs_share_tokens() {
        let g = random_directed(12, 0.2, 1);
        let perm: Vec<usize> = (0..12).map(|i| (i * 5 + 2) % 12).collect();
        let h = g.permuted(&perm).unwrap();
        for labels in [NodeLabels::AuthorId, NodeLabels::Degree] {
            assert_eq!(multiset(wl_tokens(&g, 2, labels)), multiset(wl_tokens(&h, 2, labels)));
        }
    }

    #[test]
    fn triangle_tokens_are_uniform() {
        let g = complete(3);
        let t = wl_tokens(&g, 1, NodeLabels::Degree);
        let it1: HashSet<&str> = t.iter().filter(|t| t.iteration == 1).map(|t| t.label.as_str()).collect();
        assert_eq!(it1.len(), 1);
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn star_and_triangle_tokens_are_disjoint() {
        let star_t: HashSet<_> = wl_tokens(&star(2), 1, NodeLabels::Degree).into_iter().filter(|t| t.iteration == 1).collect();
        let tri_t: HashSet<_> = wl_tokens(&complete(3), 1, NodeLabels::Degree).into_iter().filter(|t| t.iteration == 1).collect();
        assert_eq!(star_t.len(), 2);
        assert!(star_t.is_disjoint(&tri_t));
    }

    #[test]
    fn identical_graphs_embed_closer() {
        let a = random_directed(15, 0.2, 4);
        let c = cycle(15);
        let cfg = Graph2vecConfig {
            dimensions: 16,
            epochs: 50,
            labels: NodeLabels::Degree,
            wl_iterations: 2,
            ..Default::default()
        };
        let v = graph2vec(&[a.clone(), a, c], &cfg, 1).unwrap();
        assert!(cosine(&v[0], &v[1]) > cosine(&v[0], &v[2]));
        assert!(cosine(&v[0], &v[1]) > cosine(&v[1], &v[2]));
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let g = path(4);
        let cfg = Graph2vecConfig {
            epochs: 0,
            ..Default::default()
        };
        let v = graph2vec(&[g.clone()], &cfg, 3).unwrap();
        let expected: Vec<f64> = init_vector(3, &doc_key(&g, 0), 128).map(f64::from).collect();
        assert_eq!(v[0], expected);
    }

    #[test]
    fn deterministic_and_sized() {
        let gs: Vec<ConvGraph> = (0..4).map(|s| random_directed(10, 0.3, s)).collect();
        let cfg = Graph2vecConfig::default();
        let a = graph2vec(&gs, &cfg, 2).unwrap();
        assert!(a.iter().all(|v| v.len() == 128));
        assert_eq!(a, graph2vec(&gs, &cfg, 2).unwrap());
    }
}

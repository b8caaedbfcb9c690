//! Truncated random walks on undirected collapses.
//!
//! Each walk draws from its own generator, seeded by (seed, origin node id,
//! walk index), so relabeling nodes permutes the corpus and walks can be
//! sampled in any order.

use rand::Rng;

use crate::graph::{CollapseMode, ConvGraph};
use crate::util::{derived_rng, stable_hash};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkBias {
    /// Uniform neighbor choice on the unweighted collapse.
    Uniform,
    /// Second-order biased walk on the weighted collapse.
    Node2vec { p: f64, q: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<u32>>,
    pub origins: Vec<u32>,
    pub fingerprint: u64,
}

/// Weighted adjacency lists of an undirected collapse, ordered by node id
/// so that step choices do not depend on node indices.
pub(crate) struct Neighborhoods {
    lists: Vec<Vec<(usize, f64)>>,
    sorted: Vec<Vec<usize>>,
}

impl Neighborhoods {
    pub(crate) fn new(g: &ConvGraph, mode: CollapseMode) -> Self {
        let u = g.collapse(mode);
        let mut lists = vec![Vec::new(); u.node_count()];
        for e in u.edges() {
            lists[e.src].push((e.dst, e.weight));
            if e.src != e.dst {
                lists[e.dst].push((e.src, e.weight));
            }
        }
        let names = u.nodes();
        for l in &mut lists {
            l.sort_by(|a, b| names[a.0].cmp(&names[b.0]));
        }
        let sorted = lists
            .iter()
            .map(|l| {
                let mut s: Vec<usize> = l.iter().map(|&(v, _)| v).collect();
                s.sort_unstable();
                s
            })
            .collect();
        Neighborhoods { lists, sorted }
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.sorted[a].binary_search(&b).is_ok()
    }

    /// Unnormalized step scores from `cur`, having arrived from `prev`.
    pub(crate) fn step_scores(&self, prev: Option<usize>, cur: usize, bias: WalkBias, out: &mut Vec<f64>) {
        out.clear();
        for &(x, w) in &self.lists[cur] {
            let b = match (bias, prev) {
                (WalkBias::Node2vec { p, q }, Some(t)) => {
                    if x == t {
                        1.0 / p
                    } else if self.adjacent(t, x) {
                        1.0
                    } else {
                        1.0 / q
                    }
                }
                _ => 1.0,
            };
            out.push(w * b);
        }
    }

    pub(crate) fn neighbor(&self, cur: usize, k: usize) -> usize {
        self.lists[cur][k].0
    }
}

/// Step distribution at `cur` after arriving from `prev`, as (node, prob).
pub fn step_distribution(g: &ConvGraph, prev: Option<usize>, cur: usize, bias: WalkBias) -> Vec<(usize, f64)> {
    let nb = Neighborhoods::new(g, collapse_for(bias));
    let mut scores = Vec::new();
    nb.step_scores(prev, cur, bias, &mut scores);
    let total: f64 = scores.iter().sum();
    scores
        .iter()
        .enumerate()
        .map(|(k, s)| (nb.neighbor(cur, k), s / total))
        .collect()
}

fn collapse_for(bias: WalkBias) -> CollapseMode {
    match bias {
        WalkBias::Uniform => CollapseMode::UndirectedUnweighted,
        WalkBias::Node2vec { .. } => CollapseMode::UndirectedWeighted,
    }
}

pub fn random_walks(g: &ConvGraph, walk_number: usize, walk_length: usize, bias: WalkBias, seed: u64) -> Result<WalkCorpus> {
    if g.node_count() == 0 {
        return Err(Error::InvalidParameter("empty graph".into()));
    }
    if walk_number == 0 || walk_length == 0 {
        return Err(Error::InvalidParameter("walk_number and walk_length must be positive".into()));
    }
    if let WalkBias::Node2vec { p, q } = bias {
        if !(p > 0.0 && q > 0.0) {
            return Err(Error::InvalidParameter("p and q must be positive".into()));
        }
    }
    let nb = Neighborhoods::new(g, collapse_for(bias));
    let n = g.node_count();
    let mut walks = Vec::with_capacity(n * walk_number);
    let mut origins = Vec::with_capacity(n * walk_number);
    let mut scores = Vec::new();
    for w in 0..walk_number {
        for origin in 0..n {
            let mut rng = derived_rng(seed, &[b"walk", g.nodes()[origin].as_bytes(), &(w as u64).to_le_bytes()]);
            let mut walk = Vec::with_capacity(walk_length);
            walk.push(origin as u32);
            let mut prev = None;
            let mut cur = origin;
            while walk.len() < walk_length {
                nb.step_scores(prev, cur, bias, &mut scores);
                let total: f64 = scores.iter().sum();
                if scores.is_empty() || total <= 0.0 {
                    break;
                }
                let mut r = rng.random::<f64>() * total;
                let mut k = scores.len() - 1;
                for (i, s) in scores.iter().enumerate() {
                    if r < *s {
                        k = i;
                        break;
                    }
                    r -= s;
                }
                prev = Some(cur);
                cur = nb.neighbor(cur, k);
                walk.push(cur as u32);
            }
            walks.push(walk);
            origins.push(origin as u32);
        }
    }
    let bias_bytes = match bias {
        WalkBias::Uniform => vec![0u8],
        WalkBias::Node2vec { p, q } => [p.to_le_bytes(), q.to_le_bytes()].concat(),
    };
    let fingerprint = stable_hash(&[
        &seed.to_le_bytes(),
        &(walk_number as u64).to_le_bytes(),
        &(walk_length as u64).to_le_bytes(),
        &bias_bytes,
    ]);
    Ok(WalkCorpus {
        walks,
        origins,
        fingerprint,
    })
}

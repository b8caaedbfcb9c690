//! Conversational graphs and the dense spectral routines built on them.

mod canon;
pub mod spectral;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::{Error, Result};

pub use canon::canonical_order;
pub use spectral::{
    components, effective_resistance, heat_kernel, laplacian, laplacian_pseudoinverse,
    normalized_laplacian, normalized_laplacian_spectrum, HeatMode, Spectrum,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Where a graph came from: the targeted message and its context bounds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub message: String,
    #[serde(default)]
    pub channel: String,
    #[serde(default)]
    pub start_ts: i64,
    #[serde(default)]
    pub end_ts: i64,
    #[serde(default)]
    pub context_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseMode {
    /// w(u, v) = w(u -> v) + w(v -> u)
    UndirectedWeighted,
    /// every connected pair gets weight 1
    UndirectedUnweighted,
}

/// Directed (or, after [`ConvGraph::collapse`], undirected) weighted graph of
/// conversation participants with a distinguished target node.
///
/// Invariants: no self-loops, finite positive weights, at most one edge per
/// ordered pair (per unordered pair when undirected, stored with `src < dst`),
/// unique node ids, target in range. Edges are kept sorted by `(src, dst)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    target: usize,
    directed: bool,
    meta: GraphMeta,
}

impl ConvGraph {
    pub fn new(
        nodes: Vec<String>,
        edges: Vec<Edge>,
        target: usize,
        directed: bool,
        meta: GraphMeta,
    ) -> Result<Self> {
        let n = nodes.len();
        if target >= n {
            return Err(Error::InvalidParameter(format!(
                "target index {target} out of range for {n} nodes"
            )));
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, id) in nodes.iter().enumerate() {
            if seen.insert(id.as_str(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate node id {id:?}")));
            }
        }
        let mut edges = edges;
        for e in &mut edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::InvalidParameter("edge endpoint out of range".into()));
            }
            if e.src == e.dst {
                return Err(Error::InvalidParameter(format!("self-loop on {:?}", nodes[e.src])));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge weight must be finite and positive, got {}",
                    e.weight
                )));
            }
            if !directed && e.src > e.dst {
                std::mem::swap(&mut e.src, &mut e.dst);
            }
        }
        edges.sort_by_key(|e| (e.src, e.dst));
        if edges.windows(2).any(|w| (w[0].src, w[0].dst) == (w[1].src, w[1].dst)) {
            return Err(Error::InvalidParameter("parallel edges".into()));
        }
        Ok(ConvGraph {
            nodes,
            edges,
            target,
            directed,
            meta,
        })
    }

    /// Builds a directed graph by summing repeated `(src, dst, w)` contributions.
    pub fn from_weighted_pairs(
        nodes: Vec<String>,
        pairs: impl IntoIterator<Item = (usize, usize, f64)>,
        target: usize,
        meta: GraphMeta,
    ) -> Result<Self> {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (s, d, w) in pairs {
            *acc.entry((s, d)).or_insert(0.0) += w;
        }
        let edges = acc
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|((src, dst), weight)| Edge { src, dst, weight })
            .collect();
        ConvGraph::new(nodes, edges, target, true, meta)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn target_id(&self) -> &str {
        &self.nodes[self.target]
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    pub fn label(&self) -> Option<Label> {
        self.meta.label
    }

    pub fn with_label(mut self, label: Option<Label>) -> Self {
        self.meta.label = label;
        self
    }

    pub fn collapse(&self, mode: CollapseMode) -> ConvGraph {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in &self.edges {
            let key = (e.src.min(e.dst), e.src.max(e.dst));
            *acc.entry(key).or_insert(0.0) += e.weight;
        }
        let edges = acc
            .into_iter()
            .map(|((src, dst), w)| Edge {
                src,
                dst,
                weight: match mode {
                    CollapseMode::UndirectedWeighted => w,
                    CollapseMode::UndirectedUnweighted => 1.0,
                },
            })
            .collect();
        ConvGraph {
            nodes: self.nodes.clone(),
            edges,
            target: self.target,
            directed: false,
            meta: self.meta.clone(),
        }
    }

    /// Dense adjacency; symmetric when the graph is undirected.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.node_count();
        let mut a = DMatrix::zeros(n, n);
        for e in &self.edges {
            a[(e.src, e.dst)] = e.weight;
            if !self.directed {
                a[(e.dst, e.src)] = e.weight;
            }
        }
        a
    }

    /// Outgoing neighbor lists (both directions for undirected graphs), sorted by index.
    pub fn out_neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            out[e.src].push((e.dst, e.weight));
            if !self.directed {
                out[e.dst].push((e.src, e.weight));
            }
        }
        for l in &mut out {
            l.sort_by_key(|&(v, _)| v);
        }
        out
    }

    pub fn in_neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        if !self.directed {
            return self.out_neighbors();
        }
        let mut inn = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            inn[e.dst].push((e.src, e.weight));
        }
        for l in &mut inn {
            l.sort_by_key(|&(v, _)| v);
        }
        inn
    }

    /// Relabels nodes so that old node `i` ends up at position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<ConvGraph> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut nodes = vec![String::new(); n];
        for (i, &p) in perm.iter().enumerate() {
            nodes[p] = self.nodes[i].clone();
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                src: perm[e.src],
                dst: perm[e.dst],
                weight: e.weight,
            })
            .collect();
        ConvGraph::new(nodes, edges, perm[self.target], self.directed, self.meta.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GraphFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<ConvGraph> {
        let file: GraphFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<ConvGraph> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ConvGraph::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    edges: Vec<EdgeRecord>,
    target: String,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    directed: bool,
    meta: GraphMeta,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    src: String,
    dst: String,
    w: f64,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl From<&ConvGraph> for GraphFile {
    fn from(g: &ConvGraph) -> Self {
        GraphFile {
            nodes: g.nodes.clone(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    src: g.nodes[e.src].clone(),
                    dst: g.nodes[e.dst].clone(),
                    w: e.weight,
                })
                .collect(),
            target: g.target_id().to_string(),
            directed: g.directed,
            meta: g.meta.clone(),
        }
    }
}

impl TryFrom<GraphFile> for ConvGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<ConvGraph> {
        let index: HashMap<&str, usize> = f.nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("unknown node {id:?}")))
        };
        let target = lookup(&f.target)?;
        let edges = f
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    src: lookup(&e.src)?,
                    dst: lookup(&e.dst)?,
                    weight: e.w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ConvGraph::new(f.nodes.clone(), edges, target, f.directed, f.meta)
    }
}

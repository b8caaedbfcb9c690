//! Graph and node embeddings.
//!
//! Node methods (DeepWalk, Node2vec, Walklets, BoostNE, GraphWave) keep only
//! the target node's vector. Whole-graph methods are SF, FGSD and Graph2vec;
//! Graph2vec trains one model over the whole corpus.

pub mod boostne;
pub mod graph2vec;
pub mod node;
pub mod skipgram;
pub mod spectral;
pub mod walks;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use graph2vec::{wl_tokens, NodeLabels, SubgraphToken};
pub use skipgram::{SkipGramConfig, SkipGramModel};
pub use walks::{random_walks, WalkBias, WalkCorpus};

use crate::graph::ConvGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sf,
    Fgsd,
    Graph2vec,
    DeepWalk,
    Node2vec,
    Walklets,
    BoostNe,
    GraphWave,
}

impl Method {
    /// Table order: whole-graph methods first.
    pub const ALL: [Method; 8] = [
        Method::Sf,
        Method::Fgsd,
        Method::Graph2vec,
        Method::DeepWalk,
        Method::Node2vec,
        Method::Walklets,
        Method::BoostNe,
        Method::GraphWave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sf => "sf",
            Method::Fgsd => "fgsd",
            Method::Graph2vec => "graph2vec",
            Method::DeepWalk => "deepwalk",
            Method::Node2vec => "node2vec",
            Method::Walklets => "walklets",
            Method::BoostNe => "boostne",
            Method::GraphWave => "graphwave",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Method::Sf => "SF",
            Method::Fgsd => "FGSD",
            Method::Graph2vec => "Graph2vec",
            Method::DeepWalk => "DeepWalk",
            Method::Node2vec => "Node2vec",
            Method::Walklets => "Walklets",
            Method::BoostNe => "BoostNE",
            Method::GraphWave => "GraphWave",
        }
    }

    pub fn is_whole_graph(self) -> bool {
        matches!(self, Method::Sf | Method::Fgsd | Method::Graph2vec)
    }

    pub fn valid_names() -> String {
        Method::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'; valid methods: {}", Method::valid_names())))
    }
}

fn positive(name: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepWalkConfig {
    pub dimensions: usize,
    pub window_size: usize,
    pub walk_number: usize,
    pub walk_length: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub epochs: usize,
}

impl Default for DeepWalkConfig {
    fn default() -> Self {
        DeepWalkConfig {
            dimensions: 128,
            window_size: 10,
            walk_number: 5,
            walk_length: 80,
            learning_rate: 0.05,
            min_count: 1,
            epochs: 10,
        }
    }
}

impl DeepWalkConfig {
    pub fn validate(&self) -> Result<()> {
        self.skipgram(0).validate()?;
        positive("walk_number", self.walk_number > 0)?;
        positive("walk_length", self.walk_length > 0)
    }

    pub fn skipgram(&self, seed: u64) -> SkipGramConfig {
        SkipGramConfig {
            dimensions: self.dimensions,
            window_size: self.window_size,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            min_count: self.min_count,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node2vecConfig {
    pub dimensions: usize,
    pub window_size: usize,
    pub walk_number: usize,
    pub walk_length: usize,
    pub p: f64,
    pub q: f64,
    pub learning_rate: f64,
    pub min_count: usize,
    pub epochs: usize,
}

impl Default for Node2vecConfig {
    fn default() -> Self {
        Node2vecConfig {
            dimensions: 128,
            window_size: 10,
            walk_number: 10,
            walk_length: 20,
            p: 0.95,
            q: 1.0,
            learning_rate: 0.05,
            min_count: 1,
            epochs: 10,
        }
    }
}

impl Node2vecConfig {
    pub fn validate(&self) -> Result<()> {
        self.skipgram(0).validate()?;
        positive("walk_number", self.walk_number > 0)?;
        positive("walk_length", self.walk_length > 0)?;
        positive("p", self.p > 0.0)?;
        positive("q", self.q > 0.0)
    }

    pub fn skipgram(&self, seed: u64) -> SkipGramConfig {
        SkipGramConfig {
            dimensions: self.dimensions,
            window_size: self.window_size,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            min_count: self.min_count,
            seed,
            ..Default::default()
        }
    }
}

/// `window_size` is the number of scales; each scale trains with a
/// skip-gram window of 1 over its subsampled corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkletsConfig {
    pub dimensions: usize,
    pub window_size: usize,
    pub walk_number: usize,
    pub walk_length: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub epochs: usize,
}

impl Default for WalkletsConfig {
    fn default() -> Self {
        WalkletsConfig {
            dimensions: 32,
            window_size: 4,
            walk_number: 5,
            walk_length: 80,
            learning_rate: 0.05,
            min_count: 1,
            epochs: 10,
        }
    }
}

impl WalkletsConfig {
    pub fn validate(&self) -> Result<()> {
        self.skipgram(0).validate()?;
        positive("window_size", self.window_size > 0)?;
        positive("walk_number", self.walk_number > 0)?;
        positive("walk_length", self.walk_length > 0)
    }

    pub fn skipgram(&self, seed: u64) -> SkipGramConfig {
        SkipGramConfig {
            dimensions: self.dimensions,
            window_size: 1,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            min_count: self.min_count,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostNeConfig {
    pub dimensions: usize,
    /// Boosting stages after the base factorization.
    pub iterations: usize,
    pub order: usize,
    pub alpha: f64,
    /// Multiplicative updates per factorization.
    pub inner_iterations: usize,
}

impl Default for BoostNeConfig {
    fn default() -> Self {
        BoostNeConfig {
            dimensions: 8,
            iterations: 16,
            order: 1,
            alpha: 0.01,
            inner_iterations: 200,
        }
    }
}

impl BoostNeConfig {
    pub fn validate(&self) -> Result<()> {
        positive("dimensions", self.dimensions > 0)?;
        positive("order", self.order > 0)?;
        positive("alpha", self.alpha > 0.0)?;
        positive("inner_iterations", self.inner_iterations > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphWaveConfig {
    /// Number of sample points t_j; the output has twice as many entries.
    pub dimensions: usize,
    pub step_size: f64,
    pub heat_coefficient: f64,
    /// Chebyshev order used above `switch` nodes.
    pub approximation: usize,
    pub switch: usize,
}

impl Default for GraphWaveConfig {
    fn default() -> Self {
        GraphWaveConfig {
            dimensions: 100,
            step_size: 0.2,
            heat_coefficient: 0.5,
            approximation: 100,
            switch: 1000,
        }
    }
}

impl GraphWaveConfig {
    pub fn validate(&self) -> Result<()> {
        positive("dimensions", self.dimensions > 0)?;
        positive("step_size", self.step_size > 0.0)?;
        positive("heat_coefficient", self.heat_coefficient > 0.0)?;
        positive("approximation", self.approximation > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfConfig {
    pub dimensions: usize,
}

impl Default for SfConfig {
    fn default() -> Self {
        SfConfig { dimensions: 128 }
    }
}

impl SfConfig {
    pub fn validate(&self) -> Result<()> {
        positive("dimensions", self.dimensions > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgsdConfig {
    pub hist_bins: usize,
    /// Upper bound of the histogram domain [0, hist_range].
    pub hist_range: f64,
}

impl Default for FgsdConfig {
    fn default() -> Self {
        FgsdConfig {
            hist_bins: 200,
            hist_range: 10.0,
        }
    }
}

impl FgsdConfig {
    pub fn validate(&self) -> Result<()> {
        positive("hist_bins", self.hist_bins > 0)?;
        positive("hist_range", self.hist_range > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph2vecConfig {
    pub dimensions: usize,
    pub wl_iterations: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub down_sampling: f64,
    pub min_count: usize,
    pub negative: usize,
    pub labels: NodeLabels,
}

impl Default for Graph2vecConfig {
    fn default() -> Self {
        Graph2vecConfig {
            dimensions: 128,
            wl_iterations: 1,
            epochs: 12,
            learning_rate: 0.06,
            down_sampling: 1e-4,
            min_count: 1,
            negative: 5,
            labels: NodeLabels::AuthorId,
        }
    }
}

impl Graph2vecConfig {
    pub fn validate(&self) -> Result<()> {
        positive("dimensions", self.dimensions > 0)?;
        positive("learning_rate", self.learning_rate > 0.0)?;
        positive("min_count", self.min_count > 0)?;
        if self.down_sampling < 0.0 {
            return Err(Error::InvalidParameter("down_sampling must be non-negative".into()));
        }
        Ok(())
    }
}

/// Parameters of every method plus the shared seed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub seed: u64,
    pub deepwalk: DeepWalkConfig,
    pub node2vec: Node2vecConfig,
    pub walklets: WalkletsConfig,
    pub boostne: BoostNeConfig,
    pub graphwave: GraphWaveConfig,
    pub sf: SfConfig,
    pub fgsd: FgsdConfig,
    pub graph2vec: Graph2vecConfig,
}

impl EmbedConfig {
    pub fn output_dim(&self, method: Method) -> usize {
        match method {
            Method::Sf => self.sf.dimensions,
            Method::Fgsd => self.fgsd.hist_bins,
            Method::Graph2vec => self.graph2vec.dimensions,
            Method::DeepWalk => self.deepwalk.dimensions,
            Method::Node2vec => self.node2vec.dimensions,
            Method::Walklets => self.walklets.dimensions * self.walklets.window_size,
            Method::BoostNe => self.boostne.dimensions * (self.boostne.iterations + 1),
            Method::GraphWave => 2 * self.graphwave.dimensions,
        }
    }

    pub fn validate(&self, method: Method) -> Result<()> {
        match method {
            Method::Sf => self.sf.validate(),
            Method::Fgsd => self.fgsd.validate(),
            Method::Graph2vec => self.graph2vec.validate(),
            Method::DeepWalk => self.deepwalk.validate(),
            Method::Node2vec => self.node2vec.validate(),
            Method::Walklets => self.walklets.validate(),
            Method::BoostNe => self.boostne.validate(),
            Method::GraphWave => self.graphwave.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    /// Id of the targeted message the graph was built for.
    pub graph_id: String,
    pub method: Method,
    pub values: Vec<f64>,
}

/// Embeds one graph with a per-graph method.
pub fn embed_graph(g: &ConvGraph, method: Method, cfg: &EmbedConfig) -> Result<Vec<f64>> {
    let seed = cfg.seed;
    let v = match method {
        Method::Sf => spectral::sf_embed(g, &cfg.sf)?,
        Method::Fgsd => spectral::fgsd_embed(g, &cfg.fgsd)?,
        Method::DeepWalk => node::deepwalk(g, &cfg.deepwalk, seed)?,
        Method::Node2vec => node::node2vec(g, &cfg.node2vec, seed)?,
        Method::Walklets => node::walklets(g, &cfg.walklets, seed)?,
        Method::BoostNe => boostne::boostne(g, &cfg.boostne, seed)?,
        Method::GraphWave => spectral::graphwave(g, &cfg.graphwave)?,
        Method::Graph2vec => graph2vec::graph2vec(std::slice::from_ref(g), &cfg.graph2vec, seed)?.swap_remove(0),
    };
    debug_assert_eq!(v.len(), cfg.output_dim(method));
    Ok(v)
}

/// Embeds every graph. Per-graph methods run in parallel on the current
/// rayon pool; Graph2vec trains once over the whole corpus.
pub fn embed_corpus(graphs: &[ConvGraph], method: Method, cfg: &EmbedConfig) -> Result<Vec<EmbeddingVector>> {
    cfg.validate(method)?;
    let values: Vec<Vec<f64>> = if method == Method::Graph2vec {
        graph2vec::graph2vec(graphs, &cfg.graph2vec, cfg.seed)?
    } else {
        graphs
            .par_iter()
            .map(|g| embed_graph(g, method, cfg))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(graphs
        .iter()
        .zip(values)
        .map(|(g, values)| EmbeddingVector {
            graph_id: g.meta().message.clone(),
            method,
            values,
        })
        .collect())
}

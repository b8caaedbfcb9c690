//! Topological measures at graph and node scale.
//!
//! Node-scale measures produce two features: the value at the target node
//! (`<measure>_target`) and the mean over all nodes (`<measure>_mean`).
//! The nine Top Features are listed by [`TopFeature`].

pub mod measures;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::graph::ConvGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scale {
    Graph,
    NodeTarget,
    NodeMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub scales: Vec<Scale>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// The nine most discriminative measures, in display order: four graph-level
/// measures first, then five node-level ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TopFeature {
    VertexCount,
    Reciprocity,
    AverageCoreness,
    AuthorityScore,
    PageRank,
    ClosenessNode,
    ClosenessGraph,
    Strength,
    HubScore,
}

impl TopFeature {
    pub const ALL: [TopFeature; 9] = [
        TopFeature::VertexCount,
        TopFeature::Reciprocity,
        TopFeature::AverageCoreness,
        TopFeature::AuthorityScore,
        TopFeature::PageRank,
        TopFeature::ClosenessNode,
        TopFeature::ClosenessGraph,
        TopFeature::Strength,
        TopFeature::HubScore,
    ];

    /// Column name in a [`FeatureVector`].
    pub fn feature_name(self) -> &'static str {
        match self {
            TopFeature::VertexCount => "vertex_count",
            TopFeature::Reciprocity => "reciprocity",
            TopFeature::AverageCoreness => "coreness_mean",
            TopFeature::AuthorityScore => "authority_mean",
            TopFeature::PageRank => "pagerank_target",
            TopFeature::ClosenessNode => "closeness_target",
            TopFeature::ClosenessGraph => "closeness_mean",
            TopFeature::Strength => "strength_target",
            TopFeature::HubScore => "hub_target",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            TopFeature::VertexCount => "Vertex count",
            TopFeature::Reciprocity => "Reciprocity",
            TopFeature::AverageCoreness => "Average coreness",
            TopFeature::AuthorityScore => "Authority score",
            TopFeature::PageRank => "PageRank centrality",
            TopFeature::ClosenessNode => "Closeness centrality (node)",
            TopFeature::ClosenessGraph => "Closeness centrality (graph)",
            TopFeature::Strength => "Strength centrality",
            TopFeature::HubScore => "Hub score",
        }
    }

    pub fn is_graph_level(self) -> bool {
        matches!(
            self,
            TopFeature::VertexCount | TopFeature::Reciprocity | TopFeature::AverageCoreness | TopFeature::AuthorityScore
        )
    }
}

const GRAPH_MEASURES: [&str; 8] = [
    "vertex_count",
    "edge_count",
    "reciprocity",
    "density",
    "transitivity",
    "diameter",
    "modularity",
    "coreness_mean",
];

const NODE_MEASURES: [&str; 10] = [
    "pagerank",
    "closeness",
    "strength",
    "hub",
    "authority",
    "degree",
    "betweenness",
    "eccentricity",
    "participation",
    "coreness",
];

/// Every implemented feature name with its scale, in canonical column order.
pub fn catalog() -> Vec<(String, Scale)> {
    let mut out: Vec<(String, Scale)> = GRAPH_MEASURES.iter().map(|n| (n.to_string(), Scale::Graph)).collect();
    for m in NODE_MEASURES {
        out.push((format!("{m}_target"), Scale::NodeTarget));
        // mean coreness is listed among the graph measures
        if m != "coreness" {
            out.push((format!("{m}_mean"), Scale::NodeMean));
        }
    }
    out
}

/// Authority score summarized at graph level uses the mean convention.
fn scale_override(name: &str, default: Scale) -> Scale {
    if name == "authority_mean" {
        Scale::Graph
    } else {
        default
    }
}

pub fn all_feature_names() -> Vec<String> {
    catalog().into_iter().map(|(n, _)| n).collect()
}

pub fn top_feature_names() -> Vec<String> {
    TopFeature::ALL.iter().map(|f| f.feature_name().to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub pagerank_damping: f64,
    /// Tie-breaking seed for greedy modularity.
    pub modularity_seed: u64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            pagerank_damping: measures::DAMPING,
            modularity_seed: 0,
        }
    }
}

/// Computes the requested measures, in catalog order (the order of `which`
/// is irrelevant). Unknown names fail with [`Error::UndefinedMeasure`].
pub fn compute_features(g: &ConvGraph, which: &[String], cfg: &FeatureConfig) -> Result<FeatureVector> {
    if g.node_count() == 0 {
        return Err(Error::InvalidParameter("empty graph".into()));
    }
    let cat = catalog();
    let known: HashSet<&str> = cat.iter().map(|(n, _)| n.as_str()).collect();
    for w in which {
        if !known.contains(w.as_str()) {
            return Err(Error::UndefinedMeasure(w.clone()));
        }
    }
    let wanted: HashSet<&str> = which.iter().map(String::as_str).collect();
    let all = AllMeasures::compute(g, cfg, &wanted)?;

    let mut fv = FeatureVector {
        names: Vec::new(),
        values: Vec::new(),
        scales: Vec::new(),
    };
    for (name, scale) in cat {
        if !wanted.contains(name.as_str()) {
            continue;
        }
        let v = all.value(&name, g.target());
        if !v.is_finite() {
            return Err(Error::NonFiniteFeature { row: 0, col: fv.len() });
        }
        fv.scales.push(scale_override(&name, scale));
        fv.names.push(name);
        fv.values.push(v);
    }
    Ok(fv)
}

struct AllMeasures {
    graph: Vec<(&'static str, f64)>,
    node: Vec<(&'static str, Vec<f64>)>,
}

impl AllMeasures {
    fn compute(g: &ConvGraph, cfg: &FeatureConfig, wanted: &HashSet<&str>) -> Result<Self> {
        use measures::*;
        let needs = |m: &str| wanted.iter().any(|w| w.starts_with(m));
        let adj = undirected_lists(g);
        let n = g.node_count();
        let mut graph = vec![
            ("vertex_count", n as f64),
            ("edge_count", g.edge_count() as f64),
            ("reciprocity", reciprocity(g)),
            ("density", density(g)),
        ];
        let mut node: Vec<(&'static str, Vec<f64>)> = Vec::new();

        if needs("transitivity") {
            graph.push(("transitivity", transitivity(&adj)));
        }
        let ecc = if needs("diameter") || needs("eccentricity") {
            eccentricity(&adj)
        } else {
            Vec::new()
        };
        if needs("diameter") {
            graph.push(("diameter", ecc.iter().copied().max().unwrap_or(0) as f64));
        }
        if needs("eccentricity") {
            node.push(("eccentricity", ecc.iter().map(|&e| e as f64).collect()));
        }
        if needs("modularity") || needs("participation") {
            let (q, member) = greedy_modularity(g, cfg.modularity_seed);
            graph.push(("modularity", q));
            node.push(("participation", participation(g, &member)));
        }
        if needs("coreness") {
            let core: Vec<f64> = coreness(&adj).into_iter().map(|c| c as f64).collect();
            graph.push(("coreness_mean", crate::util::mean(&core)));
            node.push(("coreness", core));
        }
        if needs("pagerank") {
            node.push(("pagerank", pagerank(g, cfg.pagerank_damping)));
        }
        if needs("closeness") {
            node.push(("closeness", closeness(&adj)));
        }
        if needs("strength") {
            node.push(("strength", strength(g)));
        }
        if needs("hub") || needs("authority") {
            let (h, a) = hits(g)?;
            node.push(("hub", h));
            node.push(("authority", a));
        }
        if needs("degree") {
            node.push(("degree", adj.iter().map(|l| l.len() as f64).collect()));
        }
        if needs("betweenness") {
            node.push(("betweenness", betweenness(&adj)));
        }
        Ok(AllMeasures { graph, node })
    }

    fn value(&self, name: &str, target: usize) -> f64 {
        if let Some((_, v)) = self.graph.iter().find(|(n, _)| *n == name) {
            return *v;
        }
        let (base, target_scale) = match name.rsplit_once('_') {
            Some((b, "target")) => (b, true),
            Some((b, "mean")) => (b, false),
            _ => unreachable!("validated name {name}"),
        };
        let (_, vals) = self
            .node
            .iter()
            .find(|(n, _)| *n == base)
            .unwrap_or_else(|| unreachable!("measure {base} computed"));
        if target_scale {
            vals[target]
        } else {
            crate::util::mean(vals)
        }
    }
}

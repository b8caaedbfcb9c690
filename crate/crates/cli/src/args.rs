//! Flag groups and their mapping onto library configs. Every hyperparameter
//! flag is optional; an absent flag keeps the library default.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use convgraph::classify::{Gamma, KernelSpec, SvmParams};
use convgraph::corpus::{DatasetSpec, SynthParams};
use convgraph::embed::{EmbedConfig, Method, NodeLabels};
use convgraph::extract::ExtractConfig;
use convgraph::features::{all_feature_names, top_feature_names};
use convgraph::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "convgraph", version, about = "Structure-only abuse detection on conversational graphs")]
pub struct Cli {
    /// Seed for every stochastic stage.
    #[arg(long, global = true, env = "CONVGRAPH_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for per-graph work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Log stage progress to standard error.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled chat corpus (JSONL).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        synth: SynthArgs,
    },
    /// Sample a balanced dataset and build one conversational graph per target.
    Extract {
        /// Message stream (JSONL, or CSV by extension).
        #[arg(long)]
        input: PathBuf,
        /// Use these targets instead of sampling.
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Write the sampled targets here.
        #[arg(long)]
        dataset_out: Option<PathBuf>,
        /// Write the held-out development set here (requires --dev-fraction).
        #[arg(long, requires = "dev_fraction")]
        dev_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        dataset: DatasetArgs,
        #[command(flatten)]
        extract: ExtractArgs,
    },
    /// Compute topological measures for every graph.
    Features {
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `all`, `top`, or a comma-separated list of measure names.
        #[arg(long, default_value = "all")]
        features: String,
        #[command(flatten)]
        feature: FeatureArgs,
    },
    /// Embed every graph with one method.
    Embed {
        #[arg(long)]
        graphs: Option<PathBuf>,
        #[arg(long)]
        method: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the effective configuration as JSON and exit.
        #[arg(long)]
        show_config: bool,
        #[command(flatten)]
        embed: EmbedArgs,
    },
    /// Fit one SVM on every graph and save it as JSON.
    Train {
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        svm: SvmArgs,
    },
    /// Ten stratified 70/30 splits for the baseline and each embedding, alone and fused.
    Evaluate {
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long, num_args = 1..)]
        embeddings: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        svm: SvmArgs,
    },
    /// Capture matrix: each embedding with each single measure appended.
    Ablate {
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long, num_args = 1..)]
        embeddings: Vec<PathBuf>,
        /// Comma-separated measure names (default: the nine top features).
        #[arg(long)]
        measures: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        svm: SvmArgs,
    },
    /// Render table3.csv, fig4.csv and summary.md from evaluate/ablate output.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Run every stage inside one output directory.
    Pipeline {
        #[arg(long)]
        out: PathBuf,
        /// Generate the corpus instead of reading one.
        #[arg(long, conflicts_with = "input", required_unless_present_any = ["input", "show_config"])]
        synth: bool,
        #[arg(long)]
        input: Option<PathBuf>,
        /// `all` or a comma-separated list of methods.
        #[arg(long, default_value = "all")]
        methods: String,
        /// `all`, `top`, a comma-separated list, or `none` to skip the baseline.
        #[arg(long, default_value = "all")]
        features: String,
        /// Skip the capture matrix.
        #[arg(long)]
        no_ablate: bool,
        /// Skip stages whose inputs, config and outputs are unchanged.
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        show_config: bool,
        #[command(flatten)]
        synth_args: SynthArgs,
        #[command(flatten)]
        dataset: DatasetArgs,
        #[command(flatten)]
        extract: ExtractArgs,
        #[command(flatten)]
        feature: FeatureArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        #[command(flatten)]
        svm: SvmArgs,
    },
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub conversations: Option<usize>,
    #[arg(long)]
    pub messages_per_conversation: Option<usize>,
    #[arg(long)]
    pub abuse_rate: Option<f64>,
    #[arg(long)]
    pub structure_signal: Option<f64>,
}

impl SynthArgs {
    pub fn apply(&self, p: &mut SynthParams) {
        set(&mut p.n_conversations, self.conversations);
        set(&mut p.msgs_per_conv, self.messages_per_conversation);
        set(&mut p.abuse_rate, self.abuse_rate);
        set(&mut p.structure_signal, self.structure_signal);
    }
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Abusive messages to sample; as many non-abusive ones are added.
    #[arg(long)]
    pub abuse_count: Option<usize>,
    /// Only targets whose context is not cut by a channel boundary.
    #[arg(long)]
    pub full_context_only: Option<bool>,
    /// Allow non-abusive targets with overlapping contexts.
    #[arg(long)]
    pub allow_overlap: bool,
    /// Share of each class moved to a development set.
    #[arg(long)]
    pub dev_fraction: Option<f64>,
}

impl DatasetArgs {
    pub fn apply(&self, d: &mut DatasetSpec, context_period: usize) {
        set(&mut d.abuse_count, self.abuse_count);
        set(&mut d.full_context_only, self.full_context_only);
        if self.allow_overlap {
            d.conversation_disjoint = false;
        }
        d.context_period = context_period;
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Messages scanned back from each message when weighting edges.
    #[arg(long)]
    pub sliding_window: Option<usize>,
    /// Context length in messages, split evenly around the target.
    #[arg(long)]
    pub context_period: Option<usize>,
}

impl ExtractArgs {
    pub fn config(&self) -> ExtractConfig {
        let mut c = ExtractConfig::default();
        set(&mut c.window_size, self.sliding_window);
        set(&mut c.context_period, self.context_period);
        c
    }
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    #[arg(long)]
    pub damping: Option<f64>,
}

/// Hyperparameters named as in the method tables. A shared name such as
/// `--dimensions` applies to every selected method that has it.
#[derive(Debug, Args, Default)]
pub struct EmbedArgs {
    #[arg(long)]
    pub dimensions: Option<usize>,
    #[arg(long)]
    pub window_size: Option<usize>,
    #[arg(long)]
    pub walk_number: Option<usize>,
    #[arg(long)]
    pub walk_length: Option<usize>,
    #[arg(long = "p")]
    pub p: Option<f64>,
    #[arg(long = "q")]
    pub q: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub min_count: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub inner_iterations: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub heat_coefficient: Option<f64>,
    #[arg(long)]
    pub approximation: Option<usize>,
    #[arg(long)]
    pub switch: Option<usize>,
    #[arg(long)]
    pub hist_bins: Option<usize>,
    #[arg(long)]
    pub hist_range: Option<f64>,
    #[arg(long)]
    pub wl_iterations: Option<usize>,
    #[arg(long)]
    pub down_sampling: Option<f64>,
    #[arg(long)]
    pub negative: Option<usize>,
    #[arg(long, value_enum)]
    pub node_labels: Option<NodeLabelArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NodeLabelArg {
    Author,
    Degree,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl EmbedArgs {
    pub fn apply(&self, c: &mut EmbedConfig, methods: &[Method]) {
        for m in methods {
            match m {
                Method::DeepWalk => {
                    let d = &mut c.deepwalk;
                    set(&mut d.dimensions, self.dimensions);
                    set(&mut d.window_size, self.window_size);
                    set(&mut d.walk_number, self.walk_number);
                    set(&mut d.walk_length, self.walk_length);
                    set(&mut d.learning_rate, self.learning_rate);
                    set(&mut d.min_count, self.min_count);
                    set(&mut d.epochs, self.epochs);
                }
                Method::Node2vec => {
                    let d = &mut c.node2vec;
                    set(&mut d.dimensions, self.dimensions);
                    set(&mut d.window_size, self.window_size);
                    set(&mut d.walk_number, self.walk_number);
                    set(&mut d.walk_length, self.walk_length);
                    set(&mut d.p, self.p);
                    set(&mut d.q, self.q);
                    set(&mut d.learning_rate, self.learning_rate);
                    set(&mut d.min_count, self.min_count);
                    set(&mut d.epochs, self.epochs);
                }
                Method::Walklets => {
                    let d = &mut c.walklets;
                    set(&mut d.dimensions, self.dimensions);
                    set(&mut d.window_size, self.window_size);
                    set(&mut d.walk_number, self.walk_number);
                    set(&mut d.walk_length, self.walk_length);
                    set(&mut d.learning_rate, self.learning_rate);
                    set(&mut d.min_count, self.min_count);
                    set(&mut d.epochs, self.epochs);
                }
                Method::BoostNe => {
                    let d = &mut c.boostne;
                    set(&mut d.dimensions, self.dimensions);
                    set(&mut d.iterations, self.iterations);
                    set(&mut d.order, self.order);
                    set(&mut d.alpha, self.alpha);
                    set(&mut d.inner_iterations, self.inner_iterations);
                }
                Method::GraphWave => {
                    let d = &mut c.graphwave;
                    set(&mut d.dimensions, self.dimensions);
                    set(&mut d.step_size, self.step_size);
                    set(&mut d.heat_coefficient, self.heat_coefficient);
                    set(&mut d.approximation, self.approximation);
                    set(&mut d.switch, self.switch);
                }
                Method::Sf => set(&mut c.sf.dimensions, self.dimensions),
                Method::Fgsd => {
                    set(&mut c.fgsd.hist_bins, self.hist_bins);
                    set(&mut c.fgsd.hist_range, self.hist_range);
                }
                Method::Graph2vec => {
                    let d = &mut c.graph2vec;
                    set(&mut d.dimensions, self.dimensions);
                    set(&mut d.wl_iterations, self.wl_iterations);
                    set(&mut d.epochs, self.epochs);
                    set(&mut d.learning_rate, self.learning_rate);
                    set(&mut d.down_sampling, self.down_sampling);
                    set(&mut d.min_count, self.min_count);
                    set(&mut d.negative, self.negative);
                    if let Some(l) = self.node_labels {
                        d.labels = match l {
                            NodeLabelArg::Author => NodeLabels::AuthorId,
                            NodeLabelArg::Degree => NodeLabels::Degree,
                        };
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    /// Soft-margin penalty.
    #[arg(long = "c")]
    pub c: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    /// RBF width: `scale` or a positive number.
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
}

impl SvmArgs {
    pub fn params(&self) -> Result<SvmParams> {
        let mut p = SvmParams::default();
        set(&mut p.c, self.c);
        set(&mut p.tol, self.tol);
        let gamma = match self.gamma.as_deref() {
            None | Some("scale") => Gamma::Scale,
            Some(s) => match s.parse::<f64>() {
                Ok(g) if g > 0.0 => Gamma::Value(g),
                _ => return Err(Error::InvalidParameter(format!("gamma must be 'scale' or a positive number, got '{s}'"))),
            },
        };
        p.kernel = match self.kernel {
            Some(KernelArg::Linear) => KernelSpec::Linear,
            _ => KernelSpec::Rbf(gamma),
        };
        if !(p.c > 0.0) || !(p.tol > 0.0) {
            return Err(Error::InvalidParameter("c and tol must be positive".into()));
        }
        Ok(p)
    }
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    if s == "all" {
        return Ok(Method::ALL.to_vec());
    }
    let mut out: Vec<Method> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: Method = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter(format!("no method given; valid methods: {}", Method::valid_names())));
    }
    Ok(out)
}

/// `all`, `top`, `none` or a comma-separated list of measure names.
pub fn parse_features(s: &str) -> Vec<String> {
    match s {
        "all" => all_feature_names(),
        "top" => top_feature_names(),
        "none" => Vec::new(),
        list => list.split(',').map(str::trim).filter(|p| !p.is_empty()).map(str::to_string).collect(),
    }
}

//! Structure-only abusive message detection on chat logs.
//!
//! A targeted message is turned into a directed weighted conversational graph
//! built from the messages around it. The graph is then represented either by
//! hand-picked topological measures or by one of eight graph embeddings, and
//! the representations are classified with a soft-margin SVM under a repeated
//! stratified 70/30 protocol.
//!
//! Module map:
//!
//! * [`corpus`]: message ingestion, balanced sampling, synthetic corpora.
//! * [`graph`]: the [`ConvGraph`] type and dense spectral primitives.
//! * [`extract`]: context periods and the linear-assignment edge weighting.
//! * [`features`]: PageRank, HITS, closeness, coreness and friends.
//! * [`embed`]: DeepWalk, Node2vec, Walklets, BoostNE, GraphWave, SF, FGSD, Graph2vec.
//! * [`classify`]: SMO-trained SVM, split plans, micro F-measure.
//! * [`analysis`]: early fusion, the capture matrix, report files.
//! * [`pipeline`]: the stages chained end to end.

pub mod analysis;
pub mod classify;
pub mod corpus;
pub mod embed;
mod error;
pub mod extract;
pub mod features;
pub mod graph;
pub mod io;
pub mod pipeline;
mod util;

pub use error::{Error, ErrorKind, Result};
pub use graph::ConvGraph;

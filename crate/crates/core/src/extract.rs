//! Conversational graph extraction around a targeted message.
//!
//! Edges follow a linear-assignment rule: when a message by `u` arrives, the
//! `window_size` preceding messages of the context are scanned, and every
//! other author `v` present there receives an increment on `u -> v`
//! proportional to `window_size - g(v) + 1`, where `g(v)` is how many messages
//! back `v` last spoke. Increments of one message are normalized to sum to 1;
//! a message whose window holds only its own author adds nothing.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledMessage;
use crate::graph::{ConvGraph, GraphMeta};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractConfig {
    /// Sliding window, in messages.
    pub window_size: usize,
    /// Total context length in messages; half of it is taken on each side.
    pub context_period: usize,
    pub weighting: Weighting,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            window_size: 10,
            context_period: 850,
            weighting: Weighting::Linear,
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::InvalidParameter("window_size must be >= 1".into()));
        }
        if self.context_period < self.window_size {
            return Err(Error::InvalidParameter(format!(
                "context_period ({}) must be >= window_size ({})",
                self.context_period, self.window_size
            )));
        }
        Ok(())
    }
}

/// The slice of a channel surrounding a targeted message.
#[derive(Debug, Clone, Copy)]
pub struct Context<'a> {
    pub messages: &'a [LabeledMessage],
    /// Position of the targeted message inside `messages`.
    pub target: usize,
}

impl<'a> Context<'a> {
    pub fn target_message(&self) -> &'a LabeledMessage {
        &self.messages[self.target]
    }
}

/// Id lookup plus channel bounds over a stream sorted by (channel, timestamp).
pub struct StreamIndex<'a> {
    messages: &'a [LabeledMessage],
    by_id: HashMap<&'a str, usize>,
    /// (start, end) of the channel block containing each message.
    block: Vec<(usize, usize)>,
}

impl<'a> StreamIndex<'a> {
    pub fn new(messages: &'a [LabeledMessage]) -> Self {
        let by_id = messages.iter().enumerate().map(|(i, m)| (m.id(), i)).collect();
        let mut block = vec![(0, 0); messages.len()];
        let mut start = 0;
        while start < messages.len() {
            let mut end = start;
            while end < messages.len() && messages[end].message.channel == messages[start].message.channel {
                end += 1;
            }
            for b in &mut block[start..end] {
                *b = (start, end);
            }
            start = end;
        }
        StreamIndex {
            messages,
            by_id,
            block,
        }
    }

    pub fn context(&self, target_id: &str, cfg: &ExtractConfig) -> Result<Context<'a>> {
        let &i = self
            .by_id
            .get(target_id)
            .ok_or_else(|| Error::TargetNotFound(target_id.to_string()))?;
        let (start, end) = self.block[i];
        let half = cfg.context_period / 2;
        let lo = i.saturating_sub(half).max(start);
        let hi = (i + half + 1).min(end);
        Ok(Context {
            messages: &self.messages[lo..hi],
            target: i - lo,
        })
    }
}

/// Context of `target_id` inside `messages` (sorted by channel, then time).
pub fn extract_context<'a>(
    messages: &'a [LabeledMessage],
    target_id: &str,
    cfg: &ExtractConfig,
) -> Result<Context<'a>> {
    StreamIndex::new(messages).context(target_id, cfg)
}

/// Builds the conversational graph of a context. Node 0 is always the author
/// of the targeted message; the others follow in order of first appearance.
pub fn build_graph(context: &Context<'_>, cfg: &ExtractConfig) -> Result<ConvGraph> {
    cfg.validate()?;
    let msgs = context.messages;
    if msgs.is_empty() {
        return Err(Error::InvalidParameter("empty context".into()));
    }
    let target_msg = context.target_message();

    let mut nodes: Vec<String> = vec![target_msg.message.author.clone()];
    let mut index: HashMap<&str, usize> = HashMap::new();
    index.insert(target_msg.message.author.as_str(), 0);
    let mut authors = Vec::with_capacity(msgs.len());
    for m in msgs {
        let a = m.message.author.as_str();
        let id = *index.entry(a).or_insert_with(|| {
            nodes.push(a.to_string());
            nodes.len() - 1
        });
        authors.push(id);
    }

    let w = cfg.window_size;
    let mut pairs = Vec::new();
    let mut recency: Vec<(usize, usize)> = Vec::with_capacity(w);
    for i in 0..authors.len() {
        let u = authors[i];
        recency.clear();
        // most recent position of each distinct other author in the window
        for j in (i.saturating_sub(w)..i).rev() {
            let v = authors[j];
            if v != u && !recency.iter().any(|&(x, _)| x == v) {
                recency.push((v, i - j));
            }
        }
        let total: f64 = recency.iter().map(|&(_, g)| (w - g + 1) as f64).sum();
        for &(v, g) in &recency {
            pairs.push((u, v, (w - g + 1) as f64 / total));
        }
    }

    let meta = GraphMeta {
        message: target_msg.id().to_string(),
        channel: target_msg.message.channel.clone(),
        start_ts: msgs[0].message.timestamp,
        end_ts: msgs[msgs.len() - 1].message.timestamp,
        context_len: msgs.len(),
        label: Some(target_msg.label),
    };
    ConvGraph::from_weighted_pairs(nodes, pairs, 0, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, Message};

    fn stream(channel: &str, authors: &[&str]) -> Vec<LabeledMessage> {
        authors
            .iter()
            .enumerate()
            .map(|(i, a)| LabeledMessage {
                message: Message {
                    id: format!("{channel}{i}"),
                    author: a.to_string(),
                    timestamp: i as i64,
                    channel: channel.to_string(),
                    text: None,
                },
                label: Label::NonAbuse,
            })
            .collect()
    }

    fn cfg(window: usize, period: usize) -> ExtractConfig {
        ExtractConfig {
            window_size: window,
            context_period: period,
            weighting: Weighting::Linear,
        }
    }

    #[test]
    fn truncated_at_stream_start() {
        let authors: Vec<String> = (0..1000).map(|i| format!("a{}", i % 13)).collect();
        let refs: Vec<&str> = authors.iter().map(String::as_str).collect();
        let msgs = stream("c", &refs);
        let ctx = extract_context(&msgs, "c0", &cfg(10, 850)).unwrap();
        assert_eq!(ctx.messages.len(), 426);
        assert_eq!(ctx.target, 0);
    }

    #[test]
    fn mid_stream_context_has_851_messages() {
        let authors: Vec<String> = (0..1000).map(|i| format!("a{}", i % 13)).collect();
        let refs: Vec<&str> = authors.iter().map(String::as_str).collect();
        let msgs = stream("c", &refs);
        let ctx = extract_context(&msgs, "c500", &cfg(10, 850)).unwrap();
        assert_eq!(ctx.messages.len(), 851);
        assert_eq!(ctx.target, 425);
    }

    #[test]
    fn period_two_is_prev_target_next() {
        let msgs = stream("c", &["a", "b", "c", "d"]);
        let ctx = extract_context(&msgs, "c1", &cfg(1, 2)).unwrap();
        let ids: Vec<_> = ctx.messages.iter().map(|m| m.id()).collect();
        assert_eq!(ids, ["c0", "c1", "c2"]);
    }

    #[test]
    fn context_stays_in_channel() {
        let mut msgs = stream("a", &["x", "y", "z"]);
        msgs.extend(stream("b", &["p", "q", "r"]));
        let ctx = extract_context(&msgs, "b0", &cfg(1, 10)).unwrap();
        assert!(ctx.messages.iter().all(|m| m.message.channel == "b"));
        assert_eq!(ctx.messages.len(), 3);
    }

    #[test]
    fn missing_target() {
        let msgs = stream("c", &["a"]);
        assert!(matches!(
            extract_context(&msgs, "nope", &cfg(1, 2)),
            Err(Error::TargetNotFound(_))
        ));
    }

    #[test]
    fn single_predecessor_edge() {
        let msgs = stream("c", &["A", "B"]);
        let ctx = extract_context(&msgs, "c1", &cfg(10, 850)).unwrap();
        let g = build_graph(&ctx, &cfg(10, 850)).unwrap();
        assert_eq!(g.target_id(), "B");
        assert_eq!(g.edge_count(), 1);
        let e = g.edges()[0];
        assert_eq!((g.nodes()[e.src].as_str(), g.nodes()[e.dst].as_str()), ("B", "A"));
        assert_eq!(e.weight, 1.0);
    }

    #[test]
    fn single_author_graph() {
        let msgs = stream("c", &["A", "A", "A"]);
        let ctx = extract_context(&msgs, "c1", &cfg(10, 850)).unwrap();
        let g = build_graph(&ctx, &cfg(10, 850)).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn linear_weights_by_recency() {
        // C speaks after A (2 back) and B (1 back), window 3:
        // raw A = 3 - 2 + 1 = 2, raw B = 3; normalized 2/5 and 3/5.
        let msgs = stream("c", &["A", "B", "C"]);
        let ctx = extract_context(&msgs, "c2", &cfg(3, 10)).unwrap();
        let g = build_graph(&ctx, &cfg(3, 10)).unwrap();
        let a = g.adjacency();
        let idx = |s: &str| g.nodes().iter().position(|x| x == s).unwrap();
        assert!((a[(idx("C"), idx("A"))] - 0.4).abs() < 1e-12);
        assert!((a[(idx("C"), idx("B"))] - 0.6).abs() < 1e-12);
        assert!((a[(idx("B"), idx("A"))] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_weight_per_message_sums_to_one() {
        let authors: Vec<String> = (0..200).map(|i| format!("a{}", (i * 7 + i / 3) % 11)).collect();
        let refs: Vec<&str> = authors.iter().map(String::as_str).collect();
        let msgs = stream("c", &refs);
        let c = cfg(10, 200);
        let ctx = extract_context(&msgs, "c100", &c).unwrap();
        let g = build_graph(&ctx, &c).unwrap();
        let total: f64 = g.edges().iter().map(|e| e.weight).sum();
        // every message after the first has at least one other author in its window
        let contributing = (1..ctx.messages.len())
            .filter(|&i| {
                let a = &ctx.messages[i].message.author;
                ctx.messages[i.saturating_sub(10)..i].iter().any(|m| &m.message.author != a)
            })
            .count();
        assert!((total - contributing as f64).abs() < 1e-9);
        // endpoints all authored something
        for e in g.edges() {
            for v in [e.src, e.dst] {
                assert!(ctx.messages.iter().any(|m| m.message.author == g.nodes()[v]));
            }
        }
    }
}

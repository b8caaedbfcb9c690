//! Chat-log messages, labeled datasets, and synthetic corpora.
//!
//! JSONL is the canonical interchange format (one message object per line):
//!
//! ```text
//! {"id":"m1","author":"alice","ts":1000,"channel":"general","label":"abuse","text":"..."}
//! ```
//!
//! CSV with the same column names is accepted on input only.

mod ingest;
mod sample;
mod synth;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ingest::{ingest, write_jsonl, Format, Ingested, IngestWarning};
pub use sample::{context_conflict, sample_balanced, split_dev, DatasetSpec};
pub use synth::{synthesize, SynthParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "abuse")]
    Abuse,
    #[serde(rename = "none")]
    NonAbuse,
}

impl Label {
    /// +1 for abuse, -1 otherwise; the sign convention of the classifier.
    pub fn sign(self) -> f64 {
        match self {
            Label::Abuse => 1.0,
            Label::NonAbuse => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Abuse => "abuse",
            Label::NonAbuse => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "abuse" => Some(Label::Abuse),
            "none" => Some(Label::NonAbuse),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Abuse => f.write_str("Abuse"),
            Label::NonAbuse => f.write_str("NonAbuse"),
        }
    }
}

/// A single chat event. `text` is carried opaquely and never used as a feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub id: String,
    pub author: String,
    /// Milliseconds.
    pub timestamp: i64,
    pub channel: String,
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMessage {
    pub message: Message,
    pub label: Label,
}

impl LabeledMessage {
    pub fn id(&self) -> &str {
        &self.message.id
    }
}

/// Wire representation of one JSONL line / CSV row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct MessageRecord {
    pub id: String,
    pub author: String,
    pub ts: i64,
    pub channel: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl From<MessageRecord> for LabeledMessage {
    fn from(r: MessageRecord) -> Self {
        LabeledMessage {
            message: Message {
                id: r.id,
                author: r.author,
                timestamp: r.ts,
                channel: r.channel,
                text: r.text,
            },
            label: r.label,
        }
    }
}

impl From<&LabeledMessage> for MessageRecord {
    fn from(m: &LabeledMessage) -> Self {
        MessageRecord {
            id: m.message.id.clone(),
            author: m.message.author.clone(),
            ts: m.message.timestamp,
            channel: m.message.channel.clone(),
            label: m.label,
            text: m.message.text.clone(),
        }
    }
}

/// Index of every message inside its channel, given a slice sorted by channel.
#[derive(Debug, Clone)]
pub(crate) struct ChannelIndex {
    /// (position within channel, channel length) per message.
    pub slots: Vec<(usize, usize)>,
}

impl ChannelIndex {
    pub fn build(messages: &[LabeledMessage]) -> Self {
        let mut slots = vec![(0, 0); messages.len()];
        let mut start = 0;
        while start < messages.len() {
            let channel = &messages[start].message.channel;
            let mut end = start;
            while end < messages.len() && &messages[end].message.channel == channel {
                end += 1;
            }
            for (i, slot) in slots[start..end].iter_mut().enumerate() {
                *slot = (i, end - start);
            }
            start = end;
        }
        ChannelIndex { slots }
    }
}

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ChannelIndex, Label, LabeledMessage};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub abuse_count: usize,
    /// Sample as many non-abusive messages as abusive ones.
    pub balance: bool,
    /// Forbid non-abusive picks whose context period overlaps an already
    /// selected message.
    pub conversation_disjoint: bool,
    /// Context period (in messages) used for the overlap test.
    pub context_period: usize,
    /// Only pick messages whose context period is not truncated by the
    /// channel boundaries.
    pub full_context_only: bool,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            abuse_count: 655,
            balance: true,
            conversation_disjoint: true,
            context_period: 850,
            full_context_only: false,
            seed: 0,
        }
    }
}

/// Two messages of the same channel share a conversation when their context
/// periods (half-width `context_period / 2` on each side) overlap.
pub fn context_conflict(pos_a: usize, pos_b: usize, context_period: usize) -> bool {
    let half = context_period / 2;
    pos_a.abs_diff(pos_b) <= 2 * half
}

/// Draws a balanced dataset from `messages`, which must be sorted by channel
/// (as returned by [`super::ingest`]). The result keeps the input order.
pub fn sample_balanced(messages: &[LabeledMessage], spec: &DatasetSpec) -> Result<Vec<LabeledMessage>> {
    if spec.abuse_count == 0 {
        return Err(Error::InvalidParameter("abuse_count must be positive".into()));
    }
    let index = ChannelIndex::build(messages);
    let half = spec.context_period / 2;
    let usable = |i: usize| {
        let (pos, len) = index.slots[i];
        !spec.full_context_only || (pos >= half && pos + half < len)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut abuse: Vec<usize> = (0..messages.len())
        .filter(|&i| messages[i].label == Label::Abuse && usable(i))
        .collect();
    let mut normal: Vec<usize> = (0..messages.len())
        .filter(|&i| messages[i].label == Label::NonAbuse && usable(i))
        .collect();

    if abuse.len() < spec.abuse_count {
        return Err(Error::InsufficientData {
            class: Label::Abuse,
            requested: spec.abuse_count,
            available: abuse.len(),
        });
    }
    abuse.shuffle(&mut rng);
    abuse.truncate(spec.abuse_count);

    // Positions already taken, per channel.
    let mut taken: HashMap<&str, BTreeSet<usize>> = HashMap::new();
    for &i in &abuse {
        taken
            .entry(messages[i].message.channel.as_str())
            .or_default()
            .insert(index.slots[i].0);
    }

    normal.shuffle(&mut rng);
    let wanted = if spec.balance { spec.abuse_count } else { usize::MAX };
    let mut picked = Vec::new();
    let reach = 2 * half;
    for i in normal {
        if picked.len() == wanted {
            break;
        }
        let pos = index.slots[i].0;
        let channel = messages[i].message.channel.as_str();
        if spec.conversation_disjoint {
            let set = taken.entry(channel).or_default();
            let lo = pos.saturating_sub(reach);
            if set.range(lo..=pos + reach).next().is_some() {
                continue;
            }
            set.insert(pos);
        }
        picked.push(i);
    }
    if spec.balance && picked.len() < wanted {
        return Err(Error::InsufficientData {
            class: Label::NonAbuse,
            requested: wanted,
            available: picked.len(),
        });
    }

    let mut all: Vec<usize> = abuse.into_iter().chain(picked).collect();
    all.sort_unstable();
    Ok(all.into_iter().map(|i| messages[i].clone()).collect())
}

/// Splits off a class-balanced development set holding `floor(fraction * n_c)`
/// items of each class. Returns `(main, dev)`, both in input order.
pub fn split_dev(
    dataset: &[LabeledMessage],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledMessage>, Vec<LabeledMessage>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "dev fraction must be in [0, 1), got {fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xde5e_7000);
    let mut in_dev = vec![false; dataset.len()];
    for label in [Label::Abuse, Label::NonAbuse] {
        let mut idx: Vec<usize> = (0..dataset.len()).filter(|&i| dataset[i].label == label).collect();
        let n_dev = (fraction * idx.len() as f64).floor() as usize;
        idx.shuffle(&mut rng);
        for &i in &idx[..n_dev] {
            in_dev[i] = true;
        }
    }
    let (mut main, mut dev) = (Vec::new(), Vec::new());
    for (m, d) in dataset.iter().zip(in_dev) {
        if d {
            dev.push(m.clone());
        } else {
            main.push(m.clone());
        }
    }
    Ok((main, dev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Message;

    fn stream(channel: &str, labels: &[Label]) -> Vec<LabeledMessage> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &label)| LabeledMessage {
                message: Message {
                    id: format!("{channel}-{i}"),
                    author: format!("u{}", i % 7),
                    timestamp: i as i64 * 1000,
                    channel: channel.to_string(),
                    text: None,
                },
                label,
            })
            .collect()
    }

    fn pool(n_abuse: usize, n_normal: usize) -> Vec<LabeledMessage> {
        let mut labels = vec![Label::NonAbuse; n_abuse + n_normal];
        for i in 0..n_abuse {
            labels[i * (n_abuse + n_normal) / n_abuse] = Label::Abuse;
        }
        stream("c", &labels)
    }

    #[test]
    fn full_size_counts_balance() {
        let msgs = pool(655, 40_000);
        let spec = DatasetSpec {
            abuse_count: 655,
            conversation_disjoint: false,
            ..Default::default()
        };
        let ds = sample_balanced(&msgs, &spec).unwrap();
        assert_eq!(ds.len(), 1310);
        let n_abuse = ds.iter().filter(|m| m.label == Label::Abuse).count();
        assert_eq!(n_abuse, 655);
    }

    #[test]
    fn too_few_abuse() {
        let msgs = pool(5, 500);
        let spec = DatasetSpec {
            abuse_count: 10,
            conversation_disjoint: false,
            ..Default::default()
        };
        match sample_balanced(&msgs, &spec) {
            Err(Error::InsufficientData { class, available, .. }) => {
                assert_eq!(class, Label::Abuse);
                assert_eq!(available, 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn disjointness_limits_non_abuse() {
        // 1 abuse in a 100-message channel with context 20: non-abuse picks
        // must stay > 20 positions away from every other pick.
        let mut labels = vec![Label::NonAbuse; 100];
        labels[50] = Label::Abuse;
        let msgs = stream("c", &labels);
        let spec = DatasetSpec {
            abuse_count: 1,
            context_period: 20,
            seed: 3,
            ..Default::default()
        };
        let ds = sample_balanced(&msgs, &spec).unwrap();
        let pos: Vec<usize> = ds
            .iter()
            .map(|m| m.id()[2..].parse().unwrap())
            .collect();
        assert_eq!(pos.len(), 2);
        assert!(!context_conflict(pos[0], pos[1], 20));
    }

    #[test]
    fn insufficient_non_abuse_under_disjointness() {
        let mut labels = vec![Label::NonAbuse; 30];
        labels[3] = Label::Abuse;
        labels[20] = Label::Abuse;
        let msgs = stream("c", &labels);
        let spec = DatasetSpec {
            abuse_count: 2,
            context_period: 40,
            ..Default::default()
        };
        assert!(matches!(
            sample_balanced(&msgs, &spec),
            Err(Error::InsufficientData { class: Label::NonAbuse, .. })
        ));
    }

    #[test]
    fn full_context_only_excludes_edges() {
        let mut labels = vec![Label::NonAbuse; 40];
        labels[1] = Label::Abuse;
        labels[20] = Label::Abuse;
        let msgs = stream("c", &labels);
        let spec = DatasetSpec {
            abuse_count: 2,
            context_period: 10,
            full_context_only: true,
            conversation_disjoint: false,
            ..Default::default()
        };
        assert!(matches!(
            sample_balanced(&msgs, &spec),
            Err(Error::InsufficientData { class: Label::Abuse, available: 1, .. })
        ));
    }

    #[test]
    fn deterministic_under_seed() {
        let msgs = pool(50, 5000);
        let spec = DatasetSpec {
            abuse_count: 40,
            context_period: 10,
            seed: 11,
            ..Default::default()
        };
        let a = sample_balanced(&msgs, &spec).unwrap();
        let b = sample_balanced(&msgs, &spec).unwrap();
        assert_eq!(a, b);
        let c = sample_balanced(&msgs, &DatasetSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dev_split_is_balanced() {
        let msgs = pool(60, 6000);
        let spec = DatasetSpec {
            abuse_count: 60,
            conversation_disjoint: false,
            ..Default::default()
        };
        let ds = sample_balanced(&msgs, &spec).unwrap();
        let (main, dev) = split_dev(&ds, 0.1, 1).unwrap();
        assert_eq!(dev.len(), 12);
        assert_eq!(dev.iter().filter(|m| m.label == Label::Abuse).count(), 6);
        assert_eq!(main.len(), 108);
    }
}

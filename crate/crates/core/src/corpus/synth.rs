//! Synthetic chat corpora with a tunable structural abuse signal.
//!
//! Every channel draws a pool of authors from a shared population and emits a
//! background stream mixing weighted random speakers with short back-and-forth
//! dyads. Abusive messages sit at evenly spaced positions. Around each one, a
//! burst window may be rewritten into a conflict pattern: the abuser and a
//! rotating set of distinct responders alternate, so every responder message
//! points at the abuser. Each burst message follows that pattern with
//! probability `structure_signal`; otherwise it is ordinary background.
//!
//! The abuser is whoever the background process picked for the abusive
//! position, so with `structure_signal = 0` labels carry no structural trace.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Label, LabeledMessage, Message};
use crate::{Error, Result};

const AUTHORS_PER_CHANNEL: usize = 40;
const BURST_BEFORE: usize = 20;
const BURST_AFTER: usize = 400;
const DYAD_PROB: f64 = 0.35;
const BASE_TS: i64 = 1_600_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_conversations: usize,
    pub msgs_per_conv: usize,
    /// Fraction of abusive messages, in (0, 1). Every channel gets at least one.
    pub abuse_rate: f64,
    /// In [0, 1].
    pub structure_signal: f64,
    pub seed: u64,
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        if self.n_conversations == 0 || self.msgs_per_conv < 2 {
            return Err(Error::InvalidParameter(
                "need at least one conversation of two messages".into(),
            ));
        }
        if !(self.abuse_rate > 0.0 && self.abuse_rate < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "abuse_rate must be in (0, 1), got {}",
                self.abuse_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.structure_signal) {
            return Err(Error::InvalidParameter(format!(
                "structure_signal must be in [0, 1], got {}",
                self.structure_signal
            )));
        }
        Ok(())
    }

    pub fn abuse_per_conversation(&self) -> usize {
        ((self.abuse_rate * self.msgs_per_conv as f64).round() as usize)
            .clamp(1, self.msgs_per_conv)
    }
}

/// Builds a labeled corpus sorted by (channel, timestamp).
pub fn synthesize(params: &SynthParams) -> Result<Vec<LabeledMessage>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let population = (params.n_conversations * 8).max(AUTHORS_PER_CHANNEL * 2);
    let population: Vec<String> = (0..population).map(|k| format!("u{k:05}")).collect();

    let mut out = Vec::with_capacity(params.n_conversations * params.msgs_per_conv);
    for c in 0..params.n_conversations {
        let channel = format!("chan{c:04}");
        let pool: Vec<&String> = population.choose_multiple(&mut rng, AUTHORS_PER_CHANNEL).collect();
        let mut activity: Vec<f64> = (0..pool.len()).map(|k| 1.0 / ((k + 1) as f64).powf(0.8)).collect();
        activity.shuffle(&mut rng);
        let weighted = WeightedIndex::new(&activity).expect("positive weights");

        let positions = abuse_positions(params.msgs_per_conv, params.abuse_per_conversation(), &mut rng);
        let mut authors: Vec<usize> = Vec::with_capacity(params.msgs_per_conv);
        let mut is_abuse = vec![false; params.msgs_per_conv];
        for &p in &positions {
            is_abuse[p] = true;
        }

        // For each position, the burst (abuser, offset) governing it, if any;
        // a later burst takes over where two overlap.
        let mut burst: Vec<Option<(usize, usize)>> = vec![None; params.msgs_per_conv];
        for (b, &p) in positions.iter().enumerate() {
            let lo = p.saturating_sub(BURST_BEFORE);
            let hi = (p + BURST_AFTER).min(params.msgs_per_conv - 1);
            for (j, slot) in burst.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *slot = Some((b, j + BURST_BEFORE - p));
            }
        }

        let mut abusers: Vec<Option<usize>> = vec![None; positions.len()];
        let mut responders = ResponderCycle::new(pool.len());
        for j in 0..params.msgs_per_conv {
            let background = background_author(&authors, &weighted, &mut rng);
            let author = match burst[j] {
                Some((b, offset)) => {
                    let at_abuse = offset == BURST_BEFORE;
                    let conflict = rng.random_bool(params.structure_signal);
                    match abusers[b] {
                        None if at_abuse => {
                            abusers[b] = Some(background);
                            background
                        }
                        None if conflict => {
                            // Burst started before the abusive message: fix the
                            // abuser now so the pattern is consistent.
                            let a = background;
                            abusers[b] = Some(a);
                            a
                        }
                        None => background,
                        Some(a) if at_abuse => a,
                        Some(a) if conflict => {
                            if offset % 2 == 0 {
                                a
                            } else {
                                responders.next_excluding(a, &mut rng)
                            }
                        }
                        Some(_) => background,
                    }
                }
                None => background,
            };
            authors.push(author);
        }

        let mut ts = BASE_TS + c as i64 * 1_000_000_000;
        for (j, &a) in authors.iter().enumerate() {
            ts += rng.random_range(500..20_000);
            out.push(LabeledMessage {
                message: Message {
                    id: format!("{channel}-{j:06}"),
                    author: pool[a].clone(),
                    timestamp: ts,
                    channel: channel.clone(),
                    text: None,
                },
                label: if is_abuse[j] { Label::Abuse } else { Label::NonAbuse },
            });
        }
    }
    Ok(out)
}

/// `k` positions at segment midpoints, jittered by up to a tenth of a segment.
fn abuse_positions(len: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let seg = len as f64 / k as f64;
    let jitter = (seg / 10.0).floor() as i64;
    let mut out: Vec<usize> = (0..k)
        .map(|i| {
            let mid = (i as f64 * seg + seg / 2.0) as i64;
            let d = if jitter > 0 { rng.random_range(-jitter..=jitter) } else { 0 };
            (mid + d).clamp(0, len as i64 - 1) as usize
        })
        .collect();
    out.dedup();
    out
}

fn background_author(history: &[usize], weighted: &WeightedIndex<f64>, rng: &mut ChaCha8Rng) -> usize {
    let prev = history.last().copied();
    if history.len() >= 2 && rng.random_bool(DYAD_PROB) {
        let back = history[history.len() - 2];
        if Some(back) != prev {
            return back;
        }
    }
    let mut a = weighted.sample(rng);
    if Some(a) == prev {
        a = weighted.sample(rng);
    }
    a
}

/// Hands out responders in a shuffled round so a burst reaches many authors.
struct ResponderCycle {
    order: Vec<usize>,
    cursor: usize,
}

impl ResponderCycle {
    fn new(n: usize) -> Self {
        ResponderCycle {
            order: (0..n).collect(),
            cursor: n,
        }
    }

    fn next_excluding(&mut self, excluded: usize, rng: &mut ChaCha8Rng) -> usize {
        loop {
            if self.cursor >= self.order.len() {
                self.order.shuffle(rng);
                self.cursor = 0;
            }
            let a = self.order[self.cursor];
            self.cursor += 1;
            if a != excluded || self.order.len() == 1 {
                return a;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(signal: f64) -> SynthParams {
        SynthParams {
            n_conversations: 3,
            msgs_per_conv: 600,
            abuse_rate: 0.005,
            structure_signal: signal,
            seed: 9,
        }
    }

    #[test]
    fn shape_and_labels() {
        let corpus = synthesize(&params(1.0)).unwrap();
        assert_eq!(corpus.len(), 1800);
        let n_abuse = corpus.iter().filter(|m| m.label == Label::Abuse).count();
        assert_eq!(n_abuse, 9);
        for w in corpus.windows(2) {
            if w[0].message.channel == w[1].message.channel {
                assert!(w[0].message.timestamp < w[1].message.timestamp);
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(synthesize(&params(0.5)).unwrap(), synthesize(&params(0.5)).unwrap());
        assert_ne!(
            synthesize(&params(0.5)).unwrap(),
            synthesize(&SynthParams { seed: 10, ..params(0.5) }).unwrap()
        );
    }

    #[test]
    fn signal_concentrates_activity_on_abuser() {
        let corpus = synthesize(&params(1.0)).unwrap();
        for (i, m) in corpus.iter().enumerate() {
            if m.label != Label::Abuse {
                continue;
            }
            let after = &corpus[i + 1..i + 41];
            let by_abuser = after.iter().filter(|x| x.message.author == m.message.author).count();
            assert!(by_abuser >= 19, "abuser posted {by_abuser} of the next 40");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(synthesize(&SynthParams { abuse_rate: 0.0, ..params(0.0) }).is_err());
        assert!(synthesize(&SynthParams { structure_signal: 1.5, ..params(0.0) }).is_err());
    }
}

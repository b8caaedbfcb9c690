//! SkipGram with negative sampling over integer token sequences.
//!
//! Input vectors start uniform in ±0.5/d, seeded per token; output vectors
//! start at zero. The learning rate decays linearly to `min_learning_rate`
//! over all epochs. Context windows are shrunk by a uniform random amount per
//! position, as in word2vec.

use std::collections::HashMap;

use num_traits::Float;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::util::derived_rng;
use crate::{Error, Result};

/// Exponent applied to token counts in the noise distribution.
pub const NOISE_POWER: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub dimensions: usize,
    pub window_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub negative: usize,
    pub min_count: usize,
    /// Frequent-token down-sampling threshold; 0 disables it.
    pub down_sampling: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dimensions: 128,
            window_size: 10,
            epochs: 10,
            learning_rate: 0.05,
            min_learning_rate: 1e-4,
            negative: 5,
            min_count: 1,
            down_sampling: 0.0,
            seed: 0,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimensions == 0 || self.window_size == 0 {
            return Err(Error::InvalidParameter("dimensions and window_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || self.min_learning_rate < 0.0 {
            return Err(Error::InvalidParameter("learning_rate must be positive".into()));
        }
        if self.min_count == 0 {
            return Err(Error::InvalidParameter("min_count must be at least 1".into()));
        }
        if self.down_sampling < 0.0 {
            return Err(Error::InvalidParameter("down_sampling must be non-negative".into()));
        }
        Ok(())
    }
}

/// Tokens surviving `min_count`, in ascending raw-token order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    pub tokens: Vec<u32>,
    pub counts: Vec<u64>,
    index: HashMap<u32, usize>,
}

impl Vocab {
    pub fn build<'a>(sequences: impl IntoIterator<Item = &'a [u32]>, min_count: usize) -> Result<Vocab> {
        let mut raw: HashMap<u32, u64> = HashMap::new();
        for s in sequences {
            for &t in s {
                *raw.entry(t).or_default() += 1;
            }
        }
        let mut kept: Vec<(u32, u64)> = raw.into_iter().filter(|&(_, c)| c >= min_count as u64).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        kept.sort_unstable();
        let index = kept.iter().enumerate().map(|(i, &(t, _))| (t, i)).collect();
        Ok(Vocab {
            tokens: kept.iter().map(|&(t, _)| t).collect(),
            counts: kept.iter().map(|&(_, c)| c).collect(),
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: u32) -> Option<usize> {
        self.index.get(&token).copied()
    }

    /// Maps a raw sequence to vocabulary indices, dropping filtered tokens.
    pub fn encode(&self, seq: &[u32]) -> Vec<usize> {
        seq.iter().filter_map(|&t| self.get(t)).collect()
    }

    pub(crate) fn noise(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(self.counts.iter().map(|&c| (c as f64).powf(NOISE_POWER)))
            .expect("vocabulary counts are positive")
    }

    /// Keep probability per token under the gensim down-sampling rule.
    pub(crate) fn keep_probabilities(&self, threshold: f64) -> Vec<f64> {
        let total: u64 = self.counts.iter().sum();
        let t = threshold * total as f64;
        self.counts
            .iter()
            .map(|&c| {
                if threshold <= 0.0 {
                    1.0
                } else {
                    let c = c as f64;
                    (((c / t).sqrt() + 1.0) * t / c).min(1.0)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramModel {
    pub dimensions: usize,
    pub vocab: Vocab,
    pub input: Vec<f32>,
    pub output: Vec<f32>,
}

impl SkipGramModel {
    /// Seeded initialization; each token's input vector depends only on
    /// (seed, token).
    pub fn init(vocab: Vocab, dimensions: usize, seed: u64) -> SkipGramModel {
        let mut input = Vec::with_capacity(vocab.len() * dimensions);
        for &t in &vocab.tokens {
            input.extend(init_vector(seed, &t.to_string(), dimensions));
        }
        let output = vec![0.0; vocab.len() * dimensions];
        SkipGramModel {
            dimensions,
            vocab,
            input,
            output,
        }
    }

    pub fn vector(&self, token: u32) -> Option<&[f32]> {
        let i = self.vocab.get(token)?;
        Some(&self.input[i * self.dimensions..(i + 1) * self.dimensions])
    }

    pub fn vector_f64(&self, token: u32) -> Option<Vec<f64>> {
        self.vector(token).map(|v| v.iter().map(|&x| x as f64).collect())
    }

    /// Mean negative-sampling loss over all (center, context) pairs within
    /// `window`, using negatives drawn from a fixed seed.
    pub fn corpus_loss(&self, sequences: &[Vec<u32>], window: usize, negative: usize, seed: u64) -> f64 {
        let d = self.dimensions;
        let noise = self.vocab.noise();
        let mut rng = derived_rng(seed, &[b"eval-loss"]);
        let out64: Vec<f64> = self.output.iter().map(|&x| x as f64).collect();
        let (mut total, mut pairs) = (0.0, 0usize);
        let mut negs = Vec::with_capacity(negative);
        for seq in sequences {
            let enc = self.vocab.encode(seq);
            for (pos, &center) in enc.iter().enumerate() {
                let u: Vec<f64> = self.input[center * d..(center + 1) * d].iter().map(|&x| x as f64).collect();
                for c in context_range(pos, window, enc.len()) {
                    if c == pos {
                        continue;
                    }
                    let ctx = enc[c];
                    negs.clear();
                    negs.extend((0..negative).map(|_| noise.sample(&mut rng)).filter(|&n| n != ctx));
                    total += sgns_loss(&u, &out64, d, ctx, &negs);
                    pairs += 1;
                }
            }
        }
        if pairs == 0 {
            0.0
        } else {
            total / pairs as f64
        }
    }
}

pub(crate) fn init_vector(seed: u64, key: &str, d: usize) -> impl Iterator<Item = f32> {
    let mut rng = derived_rng(seed, &[b"init", key.as_bytes()]);
    let half = 0.5 / d as f32;
    (0..d).map(move |_| rng.random_range(-half..half))
}

fn context_range(pos: usize, reach: usize, len: usize) -> std::ops::Range<usize> {
    pos.saturating_sub(reach)..(pos + reach + 1).min(len)
}

pub(crate) fn sigmoid<F: Float>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// ℓ = −log σ(u·v_pos) − Σ_k log σ(−u·v_k), with v rows of `out`.
pub fn sgns_loss<F: Float>(u: &[F], out: &[F], dim: usize, pos: usize, negs: &[usize]) -> F {
    let row = |i: usize| &out[i * dim..(i + 1) * dim];
    let mut l = -sigmoid(dot(u, row(pos))).ln();
    for &n in negs {
        l = l - sigmoid(-dot(u, row(n))).ln();
    }
    l
}

/// One gradient step on ℓ: moves `u` and the touched rows of `out` by
/// −lr·∇ℓ. Gradients are evaluated at the incoming point when `negs` are
/// distinct and differ from `pos`. `scratch` must have length `dim`.
pub fn sgns_step<F: Float>(u: &mut [F], out: &mut [F], dim: usize, pos: usize, negs: &[usize], lr: F, scratch: &mut [F]) {
    scratch.iter_mut().for_each(|x| *x = F::zero());
    let mut apply = |idx: usize, label: F| {
        let v = &mut out[idx * dim..(idx + 1) * dim];
        let g = (label - sigmoid(dot(u, v))) * lr;
        for k in 0..dim {
            scratch[k] = scratch[k] + g * v[k];
            v[k] = v[k] + g * u[k];
        }
    };
    apply(pos, F::one());
    for &n in negs {
        apply(n, F::zero());
    }
    for k in 0..dim {
        u[k] = u[k] + scratch[k];
    }
}

/// Linearly decaying learning rate shared by all trainers.
pub(crate) struct LrSchedule {
    start: f64,
    end: f64,
    total: f64,
}

impl LrSchedule {
    pub(crate) fn new(start: f64, end: f64, total_steps: usize) -> Self {
        LrSchedule {
            start,
            end: end.min(start),
            total: total_steps.max(1) as f64,
        }
    }

    pub(crate) fn at(&self, step: usize) -> f64 {
        let frac = (step as f64 / self.total).min(1.0);
        self.start - (self.start - self.end) * frac
    }
}

pub(crate) fn draw_negatives(noise: &WeightedIndex<f64>, rng: &mut ChaCha8Rng, count: usize, pos: usize, buf: &mut Vec<usize>) {
    buf.clear();
    for _ in 0..count {
        let n = noise.sample(rng);
        if n != pos {
            buf.push(n);
        }
    }
}

/// Trains a SkipGram model on token sequences.
pub fn train(sequences: &[Vec<u32>], cfg: &SkipGramConfig) -> Result<SkipGramModel> {
    cfg.validate()?;
    let vocab = Vocab::build(sequences.iter().map(Vec::as_slice), cfg.min_count)?;
    let mut model = SkipGramModel::init(vocab, cfg.dimensions, cfg.seed);
    if cfg.epochs == 0 {
        return Ok(model);
    }
    let d = cfg.dimensions;
    let encoded: Vec<Vec<usize>> = sequences.iter().map(|s| model.vocab.encode(s)).collect();
    let noise = model.vocab.noise();
    let keep = model.vocab.keep_probabilities(cfg.down_sampling);
    let corpus_len: usize = encoded.iter().map(Vec::len).sum();
    let schedule = LrSchedule::new(cfg.learning_rate, cfg.min_learning_rate, cfg.epochs * corpus_len);
    let mut rng = derived_rng(cfg.seed, &[b"skipgram"]);
    let mut scratch = vec![0f32; d];
    let mut negs = Vec::with_capacity(cfg.negative);
    let mut sentence = Vec::new();
    let mut step = 0usize;

    for _ in 0..cfg.epochs {
        for seq in &encoded {
            sentence.clear();
            for &t in seq {
                if keep[t] >= 1.0 || rng.random::<f64>() < keep[t] {
                    sentence.push(t);
                }
            }
            let lr = schedule.at(step) as f32;
            step += seq.len();
            for pos in 0..sentence.len() {
                let reach = cfg.window_size - rng.random_range(0..cfg.window_size);
                let center = sentence[pos];
                for c in context_range(pos, reach, sentence.len()) {
                    if c == pos {
                        continue;
                    }
                    let ctx = sentence[c];
                    draw_negatives(&noise, &mut rng, cfg.negative, ctx, &mut negs);
                    let u = &mut model.input[center * d..(center + 1) * d];
                    sgns_step(u, &mut model.output, d, ctx, &negs, lr, &mut scratch);
                }
            }
        }
    }
    if model.input.iter().any(|x| !x.is_finite()) {
        return Err(Error::Spectral("skipgram training diverged".into()));
    }
    Ok(model)
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (ab, aa, bb) = a
        .iter()
        .zip(b)
        .fold((0.0, 0.0, 0.0), |(ab, aa, bb), (&x, &y)| (ab + x * y, aa + x * x, bb + y * y));
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

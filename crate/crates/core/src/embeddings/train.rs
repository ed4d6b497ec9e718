//! Skip-gram with negative sampling.
//!
//! Single-threaded and fully driven by one seeded ChaCha stream, so a fixed
//! seed reproduces the table bit for bit.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dimension: usize,
    pub window: usize,
    pub negative: usize,
    pub epochs: usize,
    /// Starting rate, decayed linearly toward zero over all epochs.
    pub learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dimension: 100,
            window: 5,
            negative: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 5,
            seed: 1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |what: &str| Err(EmbeddingError::Config(format!("{what} must be positive")));
        if self.dimension == 0 {
            return bad("dimension");
        }
        if self.window == 0 {
            return bad("window");
        }
        if self.negative == 0 {
            return bad("negative");
        }
        if self.epochs == 0 {
            return bad("epochs");
        }
        if self.min_count == 0 {
            return bad("min_count");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        Ok(())
    }
}

const UNIGRAM_POWER: f64 = 0.75;
const MAX_EXP: f64 = 6.0;
const MIN_RATE_FRACTION: f64 = 1e-4;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(UNIGRAM_POWER);
                acc
            })
            .collect();
        for c in &mut cumulative {
            *c /= acc;
        }
        NegativeSampler { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let r: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

/// Trains skip-gram vectors over an already preprocessed token stream.
///
/// Vocabulary is every word seen at least `min_count` times, ordered by
/// descending count then alphabetically. The returned table holds the input
/// (word) vectors in that order.
pub fn train_skipgram<S: AsRef<str>>(
    tokens: &[S],
    config: &TrainConfig,
) -> Result<EmbeddingTable, EmbeddingError> {
    config.validate()?;

    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in tokens {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    let mut vocab: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= config.min_count as u64)
        .collect();
    if vocab.is_empty() {
        return Err(EmbeddingError::EmptyVocabulary(config.min_count));
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let ids: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();
    let stream: Vec<usize> = tokens
        .iter()
        .filter_map(|t| ids.get(t.as_ref()).copied())
        .collect();

    let dim = config.dimension;
    let v = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input: Vec<f64> = (0..v * dim)
        .map(|_| (rng.gen::<f64>() - 0.5) / dim as f64)
        .collect();
    let mut output = vec![0.0f64; v * dim];
    let sampler = NegativeSampler::new(&vocab.iter().map(|&(_, c)| c).collect::<Vec<_>>());

    let total = (config.epochs * stream.len()).max(1) as f64;
    let mut step = 0usize;
    let mut grad = vec![0.0f64; dim];

    for _epoch in 0..config.epochs {
        for pos in 0..stream.len() {
            let progress = step as f64 / total;
            let rate = config.learning_rate * (1.0 - progress).max(MIN_RATE_FRACTION);
            step += 1;

            let center = stream[pos];
            let shrink = rng.gen_range(0..config.window);
            let reach = config.window - shrink;
            let lo = pos.saturating_sub(reach);
            let hi = (pos + reach).min(stream.len() - 1);
            for ctx_pos in lo..=hi {
                if ctx_pos == pos {
                    continue;
                }
                let context = stream[ctx_pos];
                let ctx_row = context * dim;
                grad.iter_mut().for_each(|g| *g = 0.0);

                for d in 0..=config.negative {
                    let (target, label) = if d == 0 {
                        (center, 1.0)
                    } else {
                        let t = sampler.sample(&mut rng);
                        if t == center {
                            continue;
                        }
                        (t, 0.0)
                    };
                    let out_row = target * dim;
                    let f: f64 = (0..dim)
                        .map(|k| input[ctx_row + k] * output[out_row + k])
                        .sum();
                    let g = if f > MAX_EXP {
                        (label - 1.0) * rate
                    } else if f < -MAX_EXP {
                        label * rate
                    } else {
                        (label - sigmoid(f)) * rate
                    };
                    for k in 0..dim {
                        grad[k] += g * output[out_row + k];
                        output[out_row + k] += g * input[ctx_row + k];
                    }
                }
                for k in 0..dim {
                    input[ctx_row + k] += grad[k];
                }
            }
        }
    }

    let mut table = EmbeddingTable::new(dim)?;
    for (i, (word, _)) in vocab.iter().enumerate() {
        table.insert(word, &input[i * dim..(i + 1) * dim])?;
    }
    Ok(table)
}

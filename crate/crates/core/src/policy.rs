//! First-order tabular softmax policy.
//!
//! The distribution over the next token depends on (prompt, position,
//! previous token). Unvisited states have all-zero logits, i.e. a uniform
//! distribution, and are only materialized when written.

use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateKey {
    pub prompt: usize,
    pub position: usize,
    /// Previous token id, or [`PolicyTable::bos`] at position 0.
    pub prev: usize,
}

/// Additive change to the logits, keyed like the table itself.
pub type PolicyDelta = BTreeMap<StateKey, Vec<f64>>;

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyTable {
    prompt_ids: Vec<String>,
    vocab_size: usize,
    max_len: usize,
    logits: BTreeMap<StateKey, Vec<f64>>,
    zeros: Vec<f64>,
}

/// Numerically stable log-softmax of `logits / temperature`.
pub fn log_softmax(logits: &[f64], temperature: f64) -> Vec<f64> {
    let scaled: Vec<f64> = logits.iter().map(|z| z / temperature).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + scaled.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    scaled.into_iter().map(|z| z - log_z).collect()
}

pub fn softmax(logits: &[f64], temperature: f64) -> Vec<f64> {
    log_softmax(logits, temperature).into_iter().map(f64::exp).collect()
}

/// Shannon entropy in nats.
pub fn entropy(logits: &[f64]) -> f64 {
    log_softmax(logits, 1.0)
        .into_iter()
        .map(|lp| if lp.is_finite() { -lp.exp() * lp } else { 0.0 })
        .sum()
}

impl PolicyTable {
    pub fn new(prompt_ids: Vec<String>, vocab_size: usize, max_len: usize) -> Self {
        assert!(vocab_size > 0, "vocabulary must not be empty");
        Self {
            prompt_ids,
            vocab_size,
            max_len,
            logits: BTreeMap::new(),
            zeros: vec![0.0; vocab_size],
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Sentinel "previous token" for the first position.
    pub fn bos(&self) -> usize {
        self.vocab_size
    }

    pub fn prompt_ids(&self) -> &[String] {
        &self.prompt_ids
    }

    pub fn prompt_index(&self, id: &str) -> Option<usize> {
        self.prompt_ids.iter().position(|p| p == id)
    }

    /// State in which token `tokens[position]` is emitted.
    pub fn state(&self, prompt: usize, tokens: &[usize], position: usize) -> StateKey {
        StateKey {
            prompt,
            position,
            prev: if position == 0 { self.bos() } else { tokens[position - 1] },
        }
    }

    pub fn logits(&self, key: &StateKey) -> &[f64] {
        self.logits.get(key).map(Vec::as_slice).unwrap_or(&self.zeros)
    }

    pub fn logits_mut(&mut self, key: StateKey) -> &mut Vec<f64> {
        let v = self.vocab_size;
        self.logits.entry(key).or_insert_with(|| vec![0.0; v])
    }

    pub fn log_probs(&self, key: &StateKey, temperature: f64) -> Vec<f64> {
        log_softmax(self.logits(key), temperature)
    }

    pub fn log_prob(&self, key: &StateKey, token: usize) -> f64 {
        self.log_probs(key, 1.0)[token]
    }

    /// Log-probabilities (temperature 1) of every token of a sequence.
    pub fn sequence_log_probs(&self, prompt: usize, tokens: &[usize]) -> Vec<f64> {
        (0..tokens.len())
            .map(|t| self.log_prob(&self.state(prompt, tokens, t), tokens[t]))
            .collect()
    }

    pub fn entropy(&self, key: &StateKey) -> f64 {
        entropy(self.logits(key))
    }

    /// `logits += scale · delta`.
    pub fn apply(&mut self, delta: &PolicyDelta, scale: f64) {
        for (key, grad) in delta {
            let row = self.logits_mut(*key);
            for (z, g) in row.iter_mut().zip(grad) {
                *z += scale * g;
            }
        }
    }

    /// Number of materialized states.
    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }
}

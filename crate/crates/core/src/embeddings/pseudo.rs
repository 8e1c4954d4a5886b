use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::EmbeddingRecord;
use crate::lingfeat::tokenize::word_tokens;

/// Deterministic offline embedder. Each lowercase word gets a fixed Gaussian
/// vector derived from its hash; the sentence vector is the mean of the word
/// vectors. Useful for tests and the toy pipeline, carries no semantics
/// beyond word identity.
#[derive(Debug, Clone)]
pub struct PseudoEmbedder {
    pub dim: usize,
    pub provider: String,
}

impl Default for PseudoEmbedder {
    fn default() -> Self {
        Self { dim: 384, provider: "pseudo-bow".into() }
    }
}

impl PseudoEmbedder {
    pub fn new(dim: usize) -> Self {
        Self { dim, ..Self::default() }
    }

    pub fn word_vector(&self, word: &str) -> Vec<f64> {
        let digest = Sha256::digest(word.as_bytes());
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(seed);
        (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    /// Embeds `text` under `key`, with token rows for every word.
    pub fn embed(&self, key: &str, text: &str) -> EmbeddingRecord {
        let words = word_tokens(text);
        let rows: Vec<Vec<f64>> = words.iter().map(|w| self.word_vector(w)).collect();
        let mut sentence = vec![0.0; self.dim];
        for r in &rows {
            for (s, v) in sentence.iter_mut().zip(r) {
                *s += v;
            }
        }
        if !rows.is_empty() {
            let n = rows.len() as f64;
            sentence.iter_mut().for_each(|s| *s /= n);
        }
        EmbeddingRecord {
            key: key.to_string(),
            provider: self.provider.clone(),
            dim: self.dim,
            sentence,
            tokens: Some(rows),
            token_strings: Some(words),
            pooling: Some("mean".into()),
        }
    }
}

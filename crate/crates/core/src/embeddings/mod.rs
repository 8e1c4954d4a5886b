//! Sentence- and token-level text embeddings: a JSONL file store, an HTTP
//! embedding-service client and a deterministic hashed "pseudo" provider.

mod pseudo;
mod remote;
mod store;

pub use pseudo::PseudoEmbedder;
pub use remote::{fetch_remote, Granularity, RemoteConfig};
pub use store::{load_store, write_store, EmbeddingRecord, EmbeddingStore};

use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("provider {provider}: record {key} has dim {found}, provider dim is {expected}")]
    DimMismatch { provider: String, key: String, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("no embedding for key {key:?} under provider {provider:?}")]
    MissingKey { provider: String, key: String },
    #[error("provider {provider}: key {key} already stored with different content")]
    Conflict { provider: String, key: String },
    #[error("invalid record {key}: {message}")]
    Invalid { key: String, message: String },
    #[error("embedding service response: {0}")]
    Schema(String),
    #[error(transparent)]
    Net(#[from] crate::net::NetError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Lowercase hex SHA-256 of the text, used as the key of fetched records.
pub fn content_key(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Cosine similarity; `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some(dot / (na * nb))
    }
}

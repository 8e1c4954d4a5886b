use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EmbedError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingRecord {
    pub key: String,
    pub provider: String,
    pub dim: usize,
    pub sentence: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_strings: Option<Vec<String>>,
    /// Producer-declared pooling that yielded `sentence`; never recomputed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooling: Option<String>,
}

impl EmbeddingRecord {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |message: String| EmbedError::Invalid { key: self.key.clone(), message };
        if self.dim == 0 {
            return Err(bad("dim must be positive".into()));
        }
        if self.sentence.len() != self.dim {
            return Err(bad(format!("sentence has {} values, dim is {}", self.sentence.len(), self.dim)));
        }
        if self.sentence.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite sentence value".into()));
        }
        if let Some(rows) = &self.tokens {
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != self.dim) {
                return Err(bad(format!("token row {i} has {} values, dim is {}", r.len(), self.dim)));
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(bad("non-finite token value".into()));
            }
            let n = self.token_strings.as_ref().map(Vec::len);
            if n != Some(rows.len()) {
                return Err(bad(format!("{} token rows but {:?} token strings", rows.len(), n)));
            }
        } else if self.token_strings.is_some() {
            return Err(bad("token strings without token vectors".into()));
        }
        Ok(())
    }
}

/// Append-only store indexed by (provider, key) with one dim per provider.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingStore {
    records: BTreeMap<(String, String), EmbeddingRecord>,
    dims: BTreeMap<String, usize>,
}

impl EmbeddingStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a record. Re-inserting an identical record is a no-op; a different
    /// record under an existing key is rejected.
    pub fn insert(&mut self, rec: EmbeddingRecord) -> Result<(), EmbedError> {
        rec.validate()?;
        if let Some(&d) = self.dims.get(&rec.provider) {
            if d != rec.dim {
                return Err(EmbedError::DimMismatch { provider: rec.provider, key: rec.key, expected: d, found: rec.dim });
            }
        }
        let k = (rec.provider.clone(), rec.key.clone());
        if let Some(existing) = self.records.get(&k) {
            if *existing == rec {
                return Ok(());
            }
            return Err(EmbedError::Conflict { provider: rec.provider, key: rec.key });
        }
        self.dims.insert(rec.provider.clone(), rec.dim);
        self.records.insert(k, rec);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self, provider: &str) -> Option<usize> {
        self.dims.get(provider).copied()
    }

    pub fn providers(&self) -> impl Iterator<Item = &str> {
        self.dims.keys().map(String::as_str)
    }

    pub fn get(&self, provider: &str, key: &str) -> Result<&EmbeddingRecord, EmbedError> {
        self.records
            .get(&(provider.to_string(), key.to_string()))
            .ok_or_else(|| EmbedError::MissingKey { provider: provider.to_string(), key: key.to_string() })
    }

    /// The stored sentence vector, unmodified.
    pub fn get_sentence(&self, provider: &str, key: &str) -> Result<&[f64], EmbedError> {
        self.get(provider, key).map(|r| r.sentence.as_slice())
    }

    /// Records in (provider, key) order.
    pub fn records(&self) -> impl Iterator<Item = &EmbeddingRecord> {
        self.records.values()
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, EmbedError> {
        let mut store = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| EmbedError::Malformed { line: i + 1, message: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: EmbeddingRecord =
                serde_json::from_str(&line).map_err(|e| EmbedError::Malformed { line: i + 1, message: e.to_string() })?;
            store.insert(rec).map_err(|e| match e {
                EmbedError::Invalid { message, .. } => EmbedError::Malformed { line: i + 1, message },
                other => other,
            })?;
        }
        Ok(store)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for rec in self.records() {
            serde_json::to_writer(&mut w, rec)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }
}

pub fn load_store(path: &Path) -> Result<EmbeddingStore, EmbedError> {
    let io = |source| EmbedError::Io { path: path.display().to_string(), source };
    let f = std::fs::File::open(path).map_err(io)?;
    EmbeddingStore::read_jsonl(BufReader::new(f))
}

pub fn write_store(store: &EmbeddingStore, path: &Path) -> Result<(), EmbedError> {
    let io = |source| EmbedError::Io { path: path.display().to_string(), source };
    let f = std::fs::File::create(path).map_err(io)?;
    store.write_jsonl(std::io::BufWriter::new(f)).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(key: &str, provider: &str, v: Vec<f64>) -> EmbeddingRecord {
        EmbeddingRecord {
            key: key.into(),
            provider: provider.into(),
            dim: v.len(),
            sentence: v,
            tokens: None,
            token_strings: None,
            pooling: None,
        }
    }

    #[test]
    fn two_rows_load() {
        let text = [
            serde_json::to_string(&rec("a", "p", vec![1.0, 2.0, 3.0, 4.0])).unwrap(),
            serde_json::to_string(&rec("b", "p", vec![0.1, 0.2, 0.3, 0.4])).unwrap(),
        ]
        .join("\n");
        let s = EmbeddingStore::read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dim("p"), Some(4));
    }

    #[test]
    fn dim_mismatch_within_provider() {
        let mut s = EmbeddingStore::new();
        s.insert(rec("a", "p", vec![0.0; 4])).unwrap();
        assert!(matches!(s.insert(rec("b", "p", vec![0.0; 5])), Err(EmbedError::DimMismatch { .. })));
        s.insert(rec("b", "q", vec![0.0; 5])).unwrap();
    }

    #[test]
    fn missing_keys() {
        let mut s = EmbeddingStore::new();
        s.insert(rec("a", "p", vec![0.5])).unwrap();
        assert_eq!(s.get_sentence("p", "a").unwrap(), &[0.5]);
        assert!(matches!(s.get_sentence("p", "z"), Err(EmbedError::MissingKey { .. })));
        assert!(matches!(s.get_sentence("none", "a"), Err(EmbedError::MissingKey { .. })));
    }

    #[test]
    fn append_only() {
        let mut s = EmbeddingStore::new();
        s.insert(rec("a", "p", vec![1.0])).unwrap();
        s.insert(rec("a", "p", vec![1.0])).unwrap();
        assert!(matches!(s.insert(rec("a", "p", vec![2.0])), Err(EmbedError::Conflict { .. })));
        assert_eq!(s.get_sentence("p", "a").unwrap(), &[1.0]);
    }

    #[test]
    fn malformed_line_is_reported() {
        let text = "{\"key\":\"a\",\"provider\":\"p\",\"dim\":1,\"sentence\":[1.0]}\nnot json\n";
        assert!(matches!(EmbeddingStore::read_jsonl(text.as_bytes()), Err(EmbedError::Malformed { line: 2, .. })));
    }

    #[test]
    fn token_rows_need_strings() {
        let mut r = rec("a", "p", vec![1.0, 0.0]);
        r.tokens = Some(vec![vec![1.0, 0.0]]);
        assert!(r.validate().is_err());
        r.token_strings = Some(vec!["x".into()]);
        r.validate().unwrap();
    }

    #[test]
    fn write_then_read_is_identity() {
        let mut s = EmbeddingStore::new();
        s.insert(rec("b", "p", vec![0.1 + 0.2, 1e-300, -3.5])).unwrap();
        s.insert(rec("a", "p", vec![1.0 / 3.0, 2.0, 7e22])).unwrap();
        let mut buf = Vec::new();
        s.write_jsonl(&mut buf).unwrap();
        assert_eq!(EmbeddingStore::read_jsonl(buf.as_slice()).unwrap(), s);
    }
}

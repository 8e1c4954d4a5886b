use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScoreReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn normalize(rows: &[Vec<f64>], what: &'static str) -> Result<Vec<Vec<f64>>, SimError> {
    if rows.is_empty() {
        return Err(SimError::Empty(what));
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n == 0.0 || !n.is_finite() {
                Err(SimError::Invalid(format!("{what} token {i} has zero or non-finite norm")))
            } else {
                Ok(r.iter().map(|v| v / n).collect())
            }
        })
        .collect()
}

fn weighted_mean(values: &[f64], weights: Option<&[f64]>) -> Result<f64, SimError> {
    match weights {
        None => Ok(values.iter().sum::<f64>() / values.len() as f64),
        Some(w) => {
            if w.len() != values.len() {
                return Err(SimError::Invalid("idf weights do not align with tokens".into()));
            }
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                return Err(SimError::Invalid("idf weights sum to zero".into()));
            }
            Ok(values.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / total)
        }
    }
}

/// Greedy-matching BERTScore on token embeddings, unrescaled cosine.
/// P averages each candidate token's best cosine against the reference, R
/// the reverse. Optional per-token weights replace the plain means.
pub fn bertscore(
    cand: &[Vec<f64>],
    reference: &[Vec<f64>],
    cand_weights: Option<&[f64]>,
    ref_weights: Option<&[f64]>,
) -> Result<BertScoreReport, SimError> {
    let c = normalize(cand, "candidate")?;
    let r = normalize(reference, "reference")?;
    let dim = c[0].len();
    if c.iter().chain(&r).any(|v| v.len() != dim) {
        return Err(SimError::Invalid("token vectors differ in dimension".into()));
    }
    let sim: Vec<Vec<f64>> =
        c.iter().map(|a| r.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0)).collect()).collect();
    let best_c: Vec<f64> = sim.iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
    let best_r: Vec<f64> = (0..r.len()).map(|j| sim.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let precision = weighted_mean(&best_c, cand_weights)?;
    let recall = weighted_mean(&best_r, ref_weights)?;
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(BertScoreReport { precision, recall, f1 })
}

/// Best F1 against any of several references (with its P and R).
pub fn bertscore_multi(cand: &[Vec<f64>], references: &[&[Vec<f64>]]) -> Result<BertScoreReport, SimError> {
    let mut best: Option<BertScoreReport> = None;
    for r in references {
        let s = bertscore(cand, r, None, None)?;
        if best.is_none_or(|b| s.f1 > b.f1) {
            best = Some(s);
        }
    }
    best.ok_or(SimError::Empty("reference list"))
}

/// Smoothed inverse document frequency ln((M + 1) / (df + 1)) over a
/// reference corpus of token lists.
pub fn idf_weights(corpus: &[Vec<String>]) -> std::collections::HashMap<String, f64> {
    let mut df: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for doc in corpus {
        let uniq: std::collections::HashSet<&String> = doc.iter().collect();
        for t in uniq {
            *df.entry(t.clone()).or_default() += 1;
        }
    }
    let m = corpus.len() as f64;
    df.into_iter().map(|(t, d)| (t, ((m + 1.0) / (d as f64 + 1.0)).ln())).collect()
}

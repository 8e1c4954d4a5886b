//! Quality diagnostics for synthetic transcripts: corpus BLEU with per-n
//! scores, greedy-matching BERTScore, exact t-SNE and neighbourhood overlap.

mod bertscore;
mod bleu;
mod overlap;
mod tsne;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use bertscore::{bertscore, bertscore_multi, idf_weights, BertScoreReport};
pub use bleu::{bleu, BleuReport};
pub use overlap::{overlap_report, silhouette, CentroidDistance, OverlapReport, PointGroup};
pub use tsne::{conditional_p, tsne, TsneConfig, TsneResult};

use crate::corpus::Label;
use crate::lingfeat::tokenize::word_tokens;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("{0}")]
    Invalid(String),
}

/// How synthetic candidates are paired with real references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePolicy {
    /// Every real transcript with the candidate's label.
    #[default]
    SameLabelAll,
    /// The single same-label transcript sharing the most clipped unigrams
    /// with the candidate (earliest on ties).
    NearestSingle,
}

impl std::str::FromStr for ReferencePolicy {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "same_label_all" | "same-label-all" => Ok(Self::SameLabelAll),
            "nearest_single" | "nearest-single" => Ok(Self::NearestSingle),
            other => Err(SimError::Invalid(format!("unknown reference policy {other:?}"))),
        }
    }
}

fn unigram_overlap(a: &[String], b: &[String]) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in b {
        *counts.entry(t).or_default() += 1;
    }
    a.iter()
        .filter(|t| match counts.get_mut(t.as_str()) {
            Some(c) if *c > 0 => {
                *c -= 1;
                true
            }
            _ => false,
        })
        .count()
}

/// Pairs each labelled candidate text with same-label reference texts and
/// returns tokenised (candidates, references) ready for [`bleu`].
/// Candidates whose label has no reference are an error.
pub fn reference_sets(
    candidates: &[(Label, &str)],
    references: &[(Label, &str)],
    policy: ReferencePolicy,
) -> Result<(Vec<Vec<String>>, Vec<Vec<Vec<String>>>), SimError> {
    let refs: Vec<(Label, Vec<String>)> = references.iter().map(|(l, t)| (*l, word_tokens(t))).collect();
    let mut cands = Vec::with_capacity(candidates.len());
    let mut sets = Vec::with_capacity(candidates.len());
    for (label, text) in candidates {
        let toks = word_tokens(text);
        let pool: Vec<&Vec<String>> = refs.iter().filter(|(l, _)| l == label).map(|(_, r)| r).collect();
        if pool.is_empty() {
            return Err(SimError::Invalid(format!("no {label} reference transcripts")));
        }
        let chosen = match policy {
            ReferencePolicy::SameLabelAll => pool.into_iter().cloned().collect(),
            ReferencePolicy::NearestSingle => {
                let mut best = pool[0];
                let mut best_score = unigram_overlap(&toks, best);
                for r in &pool[1..] {
                    let s = unigram_overlap(&toks, r);
                    if s > best_score {
                        best = r;
                        best_score = s;
                    }
                }
                vec![best.clone()]
            }
        };
        cands.push(toks);
        sets.push(chosen);
    }
    Ok((cands, sets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_single_picks_most_overlap() {
        let refs = [(Label::Case, "a b c"), (Label::Case, "the boy the stool"), (Label::Control, "the boy the stool falls")];
        let (_, sets) = reference_sets(&[(Label::Case, "the boy is on the stool")], &refs, ReferencePolicy::NearestSingle).unwrap();
        assert_eq!(sets[0], vec![word_tokens("the boy the stool")]);
        let (_, all) = reference_sets(&[(Label::Case, "x")], &refs, ReferencePolicy::SameLabelAll).unwrap();
        assert_eq!(all[0].len(), 2);
    }

    #[test]
    fn missing_label_errors() {
        assert!(reference_sets(&[(Label::Control, "x")], &[(Label::Case, "x")], ReferencePolicy::SameLabelAll).is_err());
    }
}

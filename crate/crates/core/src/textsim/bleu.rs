use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    /// BLEU-n = BP * p_n for n = 1..=max_n.
    pub scores: Vec<f64>,
    /// Clipped n-gram precisions p_n.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    /// Geometric mean of p_1..p_N times BP (0 if any p_n is 0).
    pub geometric: f64,
    pub candidate_length: usize,
    pub reference_length: usize,
}

fn ngrams<'a>(tokens: &'a [String], n: usize) -> HashMap<&'a [String], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Reference length closest to `c`; ties go to the shorter reference.
fn closest_ref_len(c: usize, refs: &[Vec<String>]) -> usize {
    refs.iter().map(Vec::len).min_by_key(|&r| (r.abs_diff(c), r)).unwrap_or(0)
}

/// Corpus BLEU. `references[i]` are the references of `candidates[i]`.
/// Counts are pooled over the corpus; each candidate n-gram count is clipped
/// at its largest count in any one reference.
pub fn bleu(candidates: &[Vec<String>], references: &[Vec<Vec<String>>], max_n: usize) -> Result<BleuReport, SimError> {
    if candidates.is_empty() {
        return Err(SimError::Empty("candidate list"));
    }
    if !(1..=4).contains(&max_n) {
        return Err(SimError::Invalid(format!("n must be in 1..=4, got {max_n}")));
    }
    if references.len() != candidates.len() {
        return Err(SimError::Invalid(format!("{} reference sets for {} candidates", references.len(), candidates.len())));
    }
    if let Some(i) = references.iter().position(Vec::is_empty) {
        return Err(SimError::Invalid(format!("candidate {i} has no references")));
    }
    let mut matched = vec![0usize; max_n];
    let mut total = vec![0usize; max_n];
    let (mut c_len, mut r_len) = (0usize, 0usize);
    for (cand, refs) in candidates.iter().zip(references) {
        c_len += cand.len();
        r_len += closest_ref_len(cand.len(), refs);
        for n in 1..=max_n {
            let counts = ngrams(cand, n);
            let ref_counts: Vec<HashMap<&[String], usize>> = refs.iter().map(|r| ngrams(r, n)).collect();
            for (g, c) in counts {
                let max_ref = ref_counts.iter().map(|m| *m.get(g).unwrap_or(&0)).max().unwrap_or(0);
                matched[n - 1] += c.min(max_ref);
                total[n - 1] += c;
            }
        }
    }
    if c_len == 0 {
        return Err(SimError::Empty("candidate tokens"));
    }
    let precisions: Vec<f64> = matched.iter().zip(&total).map(|(&m, &t)| if t == 0 { 0.0 } else { m as f64 / t as f64 }).collect();
    let bp = if c_len < r_len { (1.0 - r_len as f64 / c_len as f64).exp() } else { 1.0 };
    let geometric =
        if precisions.iter().any(|&p| p == 0.0) { 0.0 } else { bp * (precisions.iter().map(|p| p.ln()).sum::<f64>() / max_n as f64).exp() };
    Ok(BleuReport {
        scores: precisions.iter().map(|p| bp * p).collect(),
        precisions,
        brevity_penalty: bp,
        geometric,
        candidate_length: c_len,
        reference_length: r_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn identity_scores_one() {
        let c = vec![toks("the boy is on the stool")];
        let r = bleu(&c, &[c.clone()], 4).unwrap();
        assert_eq!(r.scores, vec![1.0; 4]);
        assert_eq!(r.brevity_penalty, 1.0);
    }

    #[test]
    fn clipping_case() {
        let r = bleu(&[toks("the the the")], &[vec![toks("the cat")]], 1).unwrap();
        assert_eq!(r.scores[0], 1.0 / 3.0);
        assert_eq!(r.brevity_penalty, 1.0);
    }

    #[test]
    fn disjoint_is_zero() {
        let r = bleu(&[toks("a b c")], &[vec![toks("x y z")]], 1).unwrap();
        assert_eq!(r.scores[0], 0.0);
    }

    #[test]
    fn brevity_penalty_applies() {
        let r = bleu(&[toks("the cat")], &[vec![toks("the cat sat down")]], 1).unwrap();
        assert_eq!(r.brevity_penalty, (1.0f64 - 2.0).exp());
        assert_eq!(r.scores[0], (-1.0f64).exp());
    }

    #[test]
    fn errors() {
        assert!(bleu(&[], &[], 1).is_err());
        assert!(bleu(&[toks("a")], &[vec![toks("a")]], 5).is_err());
    }
}

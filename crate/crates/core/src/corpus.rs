//! Transcript ingestion: CHAT parsing, manifest loading and split views.
//!
//! CHAT stripping table, applied to `*PAR:` tiers only:
//!
//! | input                          | output                         |
//! |--------------------------------|--------------------------------|
//! | `@` headers, `%` tiers, other `*` speakers | dropped            |
//! | `\x15..\x15` timing bullets    | removed                        |
//! | `[...]` codes (retrace, error, comment) | removed               |
//! | `<` `>` scope markers          | removed, words kept            |
//! | `(.)`, `(..)`, `(...)` pauses  | removed                        |
//! | `&=laughs` events              | removed                        |
//! | `&-um`, `&+fr`, `&uh`          | `um`, `fr`, `uh`               |
//! | `xxx`, `yyy`, `www`, `0word`   | removed                        |
//! | `wor(d)` shortenings           | `word`                         |
//! | `word@o` special forms         | `word`                         |
//! | `+...`, `+/.`, `+//.`, `+"/.`  | `.`                            |
//! | `+/?`, `+!?`                   | `?`                            |
//! | other `+` codes, `‡`, `„`      | removed                        |
//!
//! Text with no tier, header or dependent-tier lines is returned unchanged.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::lingfeat::tokenize::word_tokens;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("transcript is empty after parsing")]
    EmptyTranscript,
    #[error("manifest row {row}: duplicate id {id:?}")]
    DuplicateId { row: usize, id: String },
    #[error("manifest row {row}: unknown label {value:?} (expected case or control)")]
    UnknownLabel { row: usize, value: String },
    #[error("manifest row {row}: unknown split {value:?} (expected train, validation or test)")]
    UnknownSplit { row: usize, value: String },
    #[error("manifest row {row}: cannot read transcript {path}: {source}")]
    TranscriptRead {
        row: usize,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest row {row}: transcript {path} is empty after parsing")]
    EmptyRow { row: usize, path: PathBuf },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    /// Cognitively impaired.
    Case,
    /// Cognitively healthy.
    Control,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Case, Label::Control];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Case => "case",
            Label::Control => "control",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "case" => Some(Label::Case),
            "control" => Some(Label::Control),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Some(Split::Train),
            "validation" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub id: String,
    pub label: Label,
    pub split: Split,
    pub text: String,
    /// Word tokens in `text` (punctuation excluded).
    pub word_count: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl Transcript {
    pub fn new(id: impl Into<String>, label: Label, split: Split, text: impl Into<String>) -> Self {
        let text = text.into();
        let word_count = count_words(&text);
        Self { id: id.into(), label, split, text, word_count, metadata: BTreeMap::new() }
    }
}

pub fn count_words(text: &str) -> usize {
    word_tokens(text).len()
}

/// Immutable after construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub transcripts: Vec<Transcript>,
}

impl Corpus {
    pub fn new(transcripts: Vec<Transcript>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (i, t) in transcripts.iter().enumerate() {
            if !seen.insert(t.id.as_str()) {
                return Err(CorpusError::DuplicateId { row: i + 1, id: t.id.clone() });
            }
        }
        Ok(Self { transcripts })
    }

    pub fn len(&self) -> usize {
        self.transcripts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transcripts.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Transcript> {
        self.transcripts.iter().find(|t| t.id == id)
    }

    pub fn count(&self, split: Split, label: Option<Label>) -> usize {
        self.transcripts.iter().filter(|t| t.split == split && label.is_none_or(|l| t.label == l)).count()
    }

    pub fn split_counts(&self) -> BTreeMap<Split, usize> {
        Split::ALL.iter().map(|s| (*s, self.count(*s, None))).collect()
    }
}

/// Transcripts of one split, sorted by id.
pub fn split_view(corpus: &Corpus, split: Split) -> Vec<&Transcript> {
    let mut v: Vec<&Transcript> = corpus.transcripts.iter().filter(|t| t.split == split).collect();
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

fn is_chat(raw: &str) -> bool {
    raw.lines().any(|l| {
        let l = l.trim_start_matches('\u{feff}');
        l.starts_with('@') || l.starts_with('%') || is_speaker_tier(l).is_some()
    })
}

/// Returns the speaker code and utterance for a `*XXX:` main tier line.
fn is_speaker_tier(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix('*')?;
    let colon = rest.find(':')?;
    let code = &rest[..colon];
    if code.is_empty() || code.len() > 8 || !code.chars().all(|c| c.is_ascii_alphanumeric()) {
        return None;
    }
    Some((code, &rest[colon + 1..]))
}

/// Extracts participant speech from CHAT text, or passes plain text through.
pub fn parse_chat(raw: &str) -> Result<String, CorpusError> {
    if !is_chat(raw) {
        if raw.trim().is_empty() {
            return Err(CorpusError::EmptyTranscript);
        }
        return Ok(raw.to_string());
    }
    let mut utterances: Vec<String> = Vec::new();
    let mut current: Option<String> = None;
    for line in raw.lines() {
        let line = line.trim_start_matches('\u{feff}');
        if line.starts_with('\t') || line.starts_with(' ') {
            if let Some(cur) = current.as_mut() {
                cur.push(' ');
                cur.push_str(line.trim());
            }
            continue;
        }
        if let Some(cur) = current.take() {
            utterances.push(cur);
        }
        if let Some((code, utt)) = is_speaker_tier(line) {
            if code == "PAR" {
                current = Some(utt.to_string());
            }
        }
    }
    if let Some(cur) = current.take() {
        utterances.push(cur);
    }
    let cleaned: Vec<String> = utterances.iter().map(|u| clean_utterance(u)).filter(|u| !u.is_empty()).collect();
    if cleaned.is_empty() {
        return Err(CorpusError::EmptyTranscript);
    }
    Ok(cleaned.join(" "))
}

fn remove_delimited(s: &str, open: char, close: char) -> String {
    let mut out = String::with_capacity(s.len());
    let mut depth = 0usize;
    for c in s.chars() {
        if c == open && (open != close || depth == 0) {
            depth += 1;
            out.push(' ');
        } else if c == close && depth > 0 {
            depth -= 1;
        } else if depth == 0 {
            out.push(c);
        }
    }
    out
}

fn clean_word(w: &str) -> Option<String> {
    if let Some(rest) = w.strip_prefix('&') {
        if rest.starts_with('=') || rest.starts_with('*') {
            return None;
        }
        let rest = rest.trim_start_matches(['-', '+', '~']);
        return clean_word(rest);
    }
    if w.starts_with('+') {
        return match w {
            "+..." | "+/." | "+//." | "+\"/." | "+..?" | "+." => Some(".".into()),
            "+/?" | "+!?" | "+//?" => Some("?".into()),
            _ => None,
        };
    }
    if matches!(w, "xxx" | "yyy" | "www" | "‡" | "„") || w.starts_with('0') {
        return None;
    }
    let w = match w.find('@') {
        Some(i) => &w[..i],
        None => w,
    };
    if w.starts_with('(') && w.ends_with(')') && w.trim_matches(['(', ')', '.']).is_empty() {
        return None;
    }
    let w: String = w.chars().filter(|c| !matches!(c, '(' | ')' | ':' | '^' | '_' | '↑' | '↓')).collect();
    let w = w.trim_matches(|c: char| c == '<' || c == '>');
    let punct = !w.is_empty() && w.chars().all(|c| matches!(c, '.' | '?' | '!' | ',' | ';'));
    let speech = w.chars().any(char::is_alphanumeric) && !w.starts_with(['%', '*', '@']);
    (punct || speech).then(|| w.to_string())
}

fn clean_utterance(utt: &str) -> String {
    let s = remove_delimited(utt, '\u{15}', '\u{15}');
    let s = remove_delimited(&s, '[', ']');
    let s = s.replace(['<', '>'], " ");
    let words: Vec<String> = s.split_whitespace().filter_map(clean_word).collect();
    // a lone terminator left after everything else was stripped carries no speech
    if words.iter().all(|w| w.chars().all(|c| matches!(c, '.' | '?' | '!'))) {
        return String::new();
    }
    words.join(" ")
}

struct ManifestRow {
    id: String,
    label: String,
    split: String,
    transcript_path: String,
    extra: BTreeMap<String, String>,
}

impl ManifestRow {
    fn from_record(headers: &csv::StringRecord, rec: &csv::StringRecord) -> Self {
        let mut row = ManifestRow {
            id: String::new(),
            label: String::new(),
            split: String::new(),
            transcript_path: String::new(),
            extra: BTreeMap::new(),
        };
        for (h, v) in headers.iter().zip(rec.iter()) {
            let v = v.to_string();
            match h {
                "id" => row.id = v,
                "label" => row.label = v,
                "split" => row.split = v,
                "transcript_path" => row.transcript_path = v,
                other => {
                    row.extra.insert(other.to_string(), v);
                }
            }
        }
        row
    }
}

/// Loads a manifest CSV. Transcript paths are resolved against the manifest's
/// directory. Row numbers in errors count the header as row 1.
pub fn load_manifest(path: &Path) -> Result<Corpus, CorpusError> {
    let manifest_err = |message: String| CorpusError::Manifest { path: path.to_path_buf(), message };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| manifest_err(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| manifest_err(e.to_string()))?.clone();
    for required in ["id", "label", "split", "transcript_path"] {
        if !headers.iter().any(|h| h == required) {
            return Err(manifest_err(format!("missing column {required:?}")));
        }
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut seen = HashSet::new();
    let mut transcripts = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| manifest_err(format!("row {row}: {e}")))?;
        let rec = ManifestRow::from_record(&headers, &rec);
        if !seen.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateId { row, id: rec.id });
        }
        let label = Label::parse(&rec.label).ok_or_else(|| CorpusError::UnknownLabel { row, value: rec.label.clone() })?;
        let split = Split::parse(&rec.split).ok_or_else(|| CorpusError::UnknownSplit { row, value: rec.split.clone() })?;
        let tpath = base.join(&rec.transcript_path);
        let raw = std::fs::read_to_string(&tpath).map_err(|source| CorpusError::TranscriptRead { row, path: tpath.clone(), source })?;
        let text = match parse_chat(&raw) {
            Ok(t) => t,
            Err(_) => return Err(CorpusError::EmptyRow { row, path: tpath }),
        };
        let mut t = Transcript::new(rec.id, label, split, text);
        t.metadata = rec.extra.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        transcripts.push(t);
    }
    Ok(Corpus { transcripts })
}

/// Word-count summary for one split x label cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordCountStats {
    pub split: Split,
    pub label: Label,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1); 0 when n < 2.
    pub std: f64,
    pub min: usize,
    pub max: usize,
    /// Quartiles by linear interpolation between order statistics.
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Per split x label word-count statistics, in split then label order.
/// Empty cells are omitted.
pub fn corpus_stats(corpus: &Corpus) -> Vec<WordCountStats> {
    let mut out = Vec::new();
    for split in Split::ALL {
        for label in Label::ALL {
            let mut counts: Vec<f64> =
                corpus.transcripts.iter().filter(|t| t.split == split && t.label == label).map(|t| t.word_count as f64).collect();
            if counts.is_empty() {
                continue;
            }
            counts.sort_by(|a, b| a.total_cmp(b));
            out.push(WordCountStats {
                split,
                label,
                n: counts.len(),
                mean: crate::stats::mean(&counts),
                std: crate::stats::sample_std(&counts),
                min: counts[0] as usize,
                max: counts[counts.len() - 1] as usize,
                q1: crate::stats::quantile_sorted(&counts, 0.25),
                median: crate::stats::quantile_sorted(&counts, 0.5),
                q3: crate::stats::quantile_sorted(&counts, 0.75),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_timing_bullet() {
        assert_eq!(parse_chat("*PAR:\tthe boy is falling . \u{15}12_34\u{15}").unwrap(), "the boy is falling .");
    }

    #[test]
    fn plain_text_passthrough() {
        assert_eq!(parse_chat("plain sentence with no tiers").unwrap(), "plain sentence with no tiers");
    }

    #[test]
    fn investigator_only_is_empty() {
        assert!(matches!(parse_chat("*INV: tell me more ."), Err(CorpusError::EmptyTranscript)));
    }

    #[test]
    fn stripping_table() {
        let raw = "@Begin\n@Participants:\tPAR Participant, INV Investigator\n\
                   *INV:\twhat do you see ?\n\
                   *PAR:\t&-um <the boy> [/] the boy is (.) takin(g) &=laughs cookie@o [: cookies] [* m] +...\n\
                   %mor:\tdet|the n|boy\n\
                   *PAR:\txxx the water is\n\t overflowing .\n@End";
        assert_eq!(parse_chat(raw).unwrap(), "um the boy the boy is taking cookie . the water is overflowing .");
    }

    #[test]
    fn idempotent_on_examples() {
        for raw in ["*PAR: &-uh the sink [//] sink . \u{15}1_2\u{15}", "just words here ."] {
            let once = parse_chat(raw).unwrap();
            assert_eq!(parse_chat(&once).unwrap(), once);
        }
    }

    #[test]
    fn stats_two_transcripts() {
        let c = Corpus::new(vec![
            Transcript::new("a", Label::Case, Split::Train, "one two three four"),
            Transcript::new("b", Label::Case, Split::Train, "one two three four five six seven eight"),
        ])
        .unwrap();
        let s = &corpus_stats(&c)[0];
        assert_eq!((s.n, s.mean, s.min, s.max), (2, 6.0, 4, 8));
        assert_eq!(s.std, 8f64.sqrt());
    }

    #[test]
    fn stats_single_transcript() {
        let c = Corpus::new(vec![Transcript::new("a", Label::Case, Split::Test, "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10")]).unwrap();
        let s = &corpus_stats(&c)[0];
        assert_eq!((s.n, s.mean, s.min, s.max, s.std), (1, 10.0, 10, 10, 0.0));
    }

    #[test]
    fn word_count_excludes_punctuation() {
        assert_eq!(Transcript::new("x", Label::Control, Split::Train, "the boy falls .").word_count, 3);
    }

    #[test]
    fn split_view_sorted_and_empty() {
        let c = Corpus::new(vec![
            Transcript::new("s3", Label::Case, Split::Train, "a b"),
            Transcript::new("s1", Label::Control, Split::Train, "a b"),
            Transcript::new("s2", Label::Control, Split::Validation, "a b"),
        ])
        .unwrap();
        let ids: Vec<_> = split_view(&c, Split::Train).iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["s1", "s3"]);
        assert!(split_view(&c, Split::Test).is_empty());
    }
}

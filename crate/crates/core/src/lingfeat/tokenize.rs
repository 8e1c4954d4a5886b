//! Deterministic word/punctuation tokenizer with clitic splitting, sentence
//! boundaries and filler flagging.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::LingError;

/// Which filler family a token belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FillerKind {
    /// Filled pauses: um, uh, er, ...
    FilledPause,
    /// Lexical discourse markers: like, well, "you know".
    DiscourseMarker,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub is_word: bool,
    pub filler: Option<FillerKind>,
}

impl Token {
    pub fn is_filler(&self) -> bool {
        self.filler.is_some()
    }

    /// Punctuation-only token (no alphanumeric character and at least one
    /// punctuation character).
    pub fn is_punct(&self) -> bool {
        !self.is_word && self.surface.chars().all(|c| c.is_ascii_punctuation() || is_unicode_punct(c))
    }

    pub fn is_terminator(&self) -> bool {
        !self.surface.is_empty() && self.surface.chars().all(|c| matches!(c, '.' | '?' | '!'))
    }
}

fn is_unicode_punct(c: char) -> bool {
    matches!(c, '\u{2018}'..='\u{201F}' | '\u{2026}' | '\u{2013}' | '\u{2014}')
}

/// Configured filler vocabulary. Multi-word entries are matched on adjacent
/// word tokens.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FillerList {
    pub filled_pauses: Vec<String>,
    pub discourse_markers: Vec<String>,
}

impl Default for FillerList {
    /// `like` and `well` are flagged unconditionally, which over-counts their
    /// non-filler uses.
    fn default() -> Self {
        Self {
            filled_pauses: ["um", "uh", "er", "ah", "hm", "mhm"].map(String::from).to_vec(),
            discourse_markers: ["like", "well", "you know"].map(String::from).to_vec(),
        }
    }
}

impl FillerList {
    fn entries(&self) -> Vec<(Vec<String>, FillerKind)> {
        let mut out: Vec<(Vec<String>, FillerKind)> = Vec::new();
        for (list, kind) in [(&self.filled_pauses, FillerKind::FilledPause), (&self.discourse_markers, FillerKind::DiscourseMarker)] {
            for e in list {
                let words: Vec<String> = e.split_whitespace().map(str::to_lowercase).collect();
                if !words.is_empty() {
                    out.push((words, kind));
                }
            }
        }
        // longest phrases first so "you know" wins over a hypothetical "you"
        out.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
        out
    }
}

/// Token sequence plus sentence end positions (exclusive, strictly increasing,
/// the last one equal to the token count).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    pub sentence_ends: Vec<usize>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of word tokens (punctuation excluded).
    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_word).count()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentence_ends.len()
    }

    /// Token index ranges of each sentence.
    pub fn sentences(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        let mut start = 0;
        self.sentence_ends.iter().map(move |&end| {
            let r = start..end;
            start = end;
            r
        })
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word)
    }
}

const CLITICS: [&str; 6] = ["'s", "'re", "'ve", "'ll", "'d", "'m"];

/// Splits a whitespace-free chunk into leading punctuation, core, and trailing
/// punctuation pieces.
fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let is_p = |c: char| !c.is_alphanumeric() && c != '\'';
    let mut start = 0;
    while start < chars.len() && is_p(chars[start]) {
        out.push(chars[start].to_string());
        start += 1;
    }
    let mut end = chars.len();
    while end > start && (is_p(chars[end - 1]) || (chars[end - 1] == '\'' && end - 1 == start)) {
        end -= 1;
    }
    // trailing punctuation: a run of terminators becomes a single token
    let mut trailing: Vec<String> = Vec::new();
    let mut i = end;
    while i < chars.len() {
        if matches!(chars[i], '.' | '?' | '!') {
            let mut j = i;
            while j < chars.len() && matches!(chars[j], '.' | '?' | '!') {
                j += 1;
            }
            trailing.push(chars[i..j].iter().collect());
            i = j;
        } else {
            trailing.push(chars[i].to_string());
            i += 1;
        }
    }
    if end > start {
        let core: String = chars[start..end].iter().collect();
        split_clitic(&core, out);
    }
    out.extend(trailing);
}

fn split_clitic(core: &str, out: &mut Vec<String>) {
    let lower = core.to_lowercase();
    if lower.len() > 3 && lower.ends_with("n't") {
        let cut = core.len() - 3;
        out.push(core[..cut].to_string());
        out.push(core[cut..].to_string());
        return;
    }
    for c in CLITICS {
        if lower.len() > c.len() && lower.ends_with(c) {
            let cut = core.len() - c.len();
            out.push(core[..cut].to_string());
            out.push(core[cut..].to_string());
            return;
        }
    }
    out.push(core.to_string());
}

/// Tokenizes `text`.
///
/// Rules: whitespace separates chunks; leading and trailing punctuation is
/// split off (a run of `.`, `?`, `!` stays one token); the clitics `'s 're
/// 've 'll 'd 'm` and `n't` are split from their host ("she's" -> "she",
/// "'s"; "don't" -> "do", "n't"); curly apostrophes are normalized to `'`.
/// Sentences end after a terminator token and at end of input.
pub fn tokenize(text: &str, fillers: &FillerList) -> Result<TokenStream, LingError> {
    let normalized = text.replace(['\u{2019}', '\u{2018}'], "'");
    let mut pieces = Vec::new();
    for chunk in normalized.split_whitespace() {
        split_chunk(chunk, &mut pieces);
    }
    if pieces.is_empty() {
        return Err(LingError::EmptyTranscript);
    }
    let mut tokens: Vec<Token> = pieces
        .into_iter()
        .map(|surface| {
            let lower = surface.to_lowercase();
            let is_word = surface.chars().any(char::is_alphanumeric);
            Token { surface, lower, is_word, filler: None }
        })
        .collect();

    let entries = fillers.entries();
    let mut i = 0;
    while i < tokens.len() {
        let mut matched = 0;
        for (words, kind) in &entries {
            let n = words.len();
            if i + n <= tokens.len() && tokens[i..i + n].iter().zip(words).all(|(t, w)| t.is_word && &t.lower == w) {
                for t in &mut tokens[i..i + n] {
                    t.filler = Some(*kind);
                }
                matched = n;
                break;
            }
        }
        i += matched.max(1);
    }

    let mut sentence_ends = Vec::new();
    for (idx, t) in tokens.iter().enumerate() {
        if t.is_terminator() {
            sentence_ends.push(idx + 1);
        }
    }
    if sentence_ends.last() != Some(&tokens.len()) {
        sentence_ends.push(tokens.len());
    }
    Ok(TokenStream { tokens, sentence_ends })
}

/// Lowercased word tokens, the unit used by BLEU and the near-duplicate check.
pub fn word_tokens(text: &str) -> Vec<String> {
    match tokenize(text, &FillerList { filled_pauses: vec![], discourse_markers: vec![] }) {
        Ok(ts) => ts.tokens.into_iter().filter(|t| t.is_word).map(|t| t.lower).collect(),
        Err(_) => Vec::new(),
    }
}

/// Set of lowercased filler words, for callers that only need membership.
pub fn filler_words(fillers: &FillerList) -> HashSet<String> {
    fillers.filled_pauses.iter().chain(&fillers.discourse_markers).map(|s| s.to_lowercase()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(ts: &TokenStream) -> Vec<&str> {
        ts.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    #[test]
    fn splits_terminal_punctuation() {
        let ts = tokenize("the boy falls.", &FillerList::default()).unwrap();
        assert_eq!(surfaces(&ts), ["the", "boy", "falls", "."]);
        assert_eq!(ts.sentence_count(), 1);
        assert_eq!(ts.sentence_ends, vec![4]);
        assert_eq!(ts.word_count(), 3);
    }

    #[test]
    fn flags_fillers() {
        let ts = tokenize("um the the cookie", &FillerList::default()).unwrap();
        assert_eq!(ts.len(), 4);
        assert_eq!(ts.tokens[0].filler, Some(FillerKind::FilledPause));
        assert!(ts.tokens[1..].iter().all(|t| !t.is_filler()));
    }

    #[test]
    fn clitic_rule() {
        let ts = tokenize("she's washing dishes", &FillerList::default()).unwrap();
        assert_eq!(surfaces(&ts), ["she", "'s", "washing", "dishes"]);
        let ts = tokenize("I don't know.", &FillerList::default()).unwrap();
        assert_eq!(surfaces(&ts), ["I", "do", "n't", "know", "."]);
        let ts = tokenize("she\u{2019}ll go", &FillerList::default()).unwrap();
        assert_eq!(surfaces(&ts), ["she", "'ll", "go"]);
    }

    #[test]
    fn phrase_fillers_and_sentences() {
        let ts = tokenize("well you know. he is, uh, there...", &FillerList::default()).unwrap();
        assert_eq!(surfaces(&ts), ["well", "you", "know", ".", "he", "is", ",", "uh", ",", "there", "..."]);
        let flagged: Vec<bool> = ts.tokens.iter().map(Token::is_filler).collect();
        assert_eq!(flagged, [true, true, true, false, false, false, false, true, false, false, false]);
        assert_eq!(ts.sentence_ends, vec![4, 11]);
    }

    #[test]
    fn unterminated_final_sentence() {
        let ts = tokenize("a b. c d", &FillerList::default()).unwrap();
        assert_eq!(ts.sentence_ends, vec![3, 5]);
        let ranges: Vec<_> = ts.sentences().collect();
        assert_eq!(ranges, vec![0..3, 3..5]);
    }

    #[test]
    fn empty_text_is_error() {
        assert!(matches!(tokenize("  \n ", &FillerList::default()), Err(LingError::EmptyTranscript)));
    }

    #[test]
    fn quotes_and_parens() {
        let ts = tokenize("(\"stool\") falls!", &FillerList::default()).unwrap();
        assert_eq!(surfaces(&ts), ["(", "\"", "stool", "\"", ")", "falls", "!"]);
    }
}

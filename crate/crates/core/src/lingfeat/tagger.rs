//! Lexicon + suffix-rule part-of-speech tagger driven by a versioned JSON
//! model file.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize::TokenStream;
use super::LingError;

pub const TAGGER_FORMAT: &str = "cogscreen-tagger";
pub const TAGGER_VERSION: u32 = 1;

const BUNDLED_MODEL: &str = include_str!("../../assets/tagger-v1.json");

/// Universal-style coarse tag set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Conj,
    Num,
    Part,
    Intj,
    Punct,
    X,
}

impl PosTag {
    pub const ALL: [PosTag; 13] = [
        PosTag::Noun,
        PosTag::Verb,
        PosTag::Adj,
        PosTag::Adv,
        PosTag::Pron,
        PosTag::Det,
        PosTag::Adp,
        PosTag::Conj,
        PosTag::Num,
        PosTag::Part,
        PosTag::Intj,
        PosTag::Punct,
        PosTag::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Pron => "PRON",
            PosTag::Det => "DET",
            PosTag::Adp => "ADP",
            PosTag::Conj => "CONJ",
            PosTag::Num => "NUM",
            PosTag::Part => "PART",
            PosTag::Intj => "INTJ",
            PosTag::Punct => "PUNCT",
            PosTag::X => "X",
        }
    }

    pub fn is_content(self) -> bool {
        matches!(self, PosTag::Noun | PosTag::Verb | PosTag::Adj | PosTag::Adv)
    }

    pub fn is_function(self) -> bool {
        matches!(self, PosTag::Det | PosTag::Adp | PosTag::Conj | PosTag::Pron | PosTag::Part)
    }
}

/// Tags aligned one-to-one with a [`TokenStream`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosTags(pub Vec<PosTag>);

/// Anything that can tag a token stream deterministically.
pub trait Tagger: Send + Sync {
    fn tag(&self, tokens: &TokenStream) -> PosTags;
    /// Identifier recorded in feature provenance.
    fn name(&self) -> String;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuffixRule {
    pub suffix: String,
    pub tag: PosTag,
    pub min_len: usize,
}

/// Retags a token from `from` to `to` when the previous token carries `prev`
/// and `to` is among the token's candidate tags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextRule {
    pub prev: PosTag,
    pub from: PosTag,
    pub to: PosTag,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaggerModel {
    pub format: String,
    pub version: u32,
    pub default_tag: PosTag,
    pub lexicon: HashMap<String, Vec<PosTag>>,
    pub suffix_rules: Vec<SuffixRule>,
    pub context_rules: Vec<ContextRule>,
}

impl TaggerModel {
    pub fn from_json(text: &str) -> Result<Self, LingError> {
        let model: TaggerModel = serde_json::from_str(text).map_err(|e| LingError::TaggerModel(e.to_string()))?;
        if model.format != TAGGER_FORMAT || model.version != TAGGER_VERSION {
            return Err(LingError::TaggerModel(format!(
                "unsupported tagger model {} v{} (expected {TAGGER_FORMAT} v{TAGGER_VERSION})",
                model.format, model.version
            )));
        }
        if let Some((w, _)) = model.lexicon.iter().find(|(_, tags)| tags.is_empty()) {
            return Err(LingError::TaggerModel(format!("lexicon entry {w:?} has no tags")));
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self, LingError> {
        let text = std::fs::read_to_string(path).map_err(|e| LingError::Io { path: path.display().to_string(), source: e })?;
        Self::from_json(&text)
    }

    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_MODEL).expect("bundled tagger model is valid")
    }
}

const OPEN_CLASS: [PosTag; 3] = [PosTag::Noun, PosTag::Verb, PosTag::Adj];

/// The bundled rule tagger.
///
/// Resolution order per token: punctuation -> PUNCT; digits -> NUM; other
/// non-word symbols -> X; lexicon entry (first listed tag); longest matching
/// suffix rule; default tag. Context rules then run left to right over the
/// tokens whose candidate set allows the rewrite (guessed tokens may become any
/// open-class tag).
#[derive(Debug, Clone)]
pub struct RuleTagger {
    model: TaggerModel,
    suffixes: Vec<SuffixRule>,
}

impl RuleTagger {
    pub fn new(model: TaggerModel) -> Self {
        let mut suffixes = model.suffix_rules.clone();
        suffixes.sort_by(|a, b| b.suffix.len().cmp(&a.suffix.len()));
        Self { model, suffixes }
    }

    pub fn bundled() -> Self {
        Self::new(TaggerModel::bundled())
    }

    fn initial(&self, lower: &str, is_word: bool, is_punct: bool) -> (PosTag, Vec<PosTag>) {
        if is_punct {
            return (PosTag::Punct, vec![PosTag::Punct]);
        }
        if !is_word {
            return (PosTag::X, vec![PosTag::X]);
        }
        if lower.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.') {
            return (PosTag::Num, vec![PosTag::Num]);
        }
        if let Some(tags) = self.model.lexicon.get(lower) {
            return (tags[0], tags.clone());
        }
        let n = lower.chars().count();
        for rule in &self.suffixes {
            if n >= rule.min_len && lower.ends_with(&rule.suffix) {
                return (rule.tag, OPEN_CLASS.to_vec());
            }
        }
        (self.model.default_tag, OPEN_CLASS.to_vec())
    }
}

impl Tagger for RuleTagger {
    fn tag(&self, tokens: &TokenStream) -> PosTags {
        let mut tags = Vec::with_capacity(tokens.len());
        let mut candidates = Vec::with_capacity(tokens.len());
        for t in &tokens.tokens {
            let (tag, cands) = self.initial(&t.lower, t.is_word, t.is_punct());
            tags.push(tag);
            candidates.push(cands);
        }
        for i in 1..tags.len() {
            for rule in &self.model.context_rules {
                if tags[i - 1] == rule.prev && tags[i] == rule.from && candidates[i].contains(&rule.to) {
                    tags[i] = rule.to;
                    break;
                }
            }
        }
        PosTags(tags)
    }

    fn name(&self) -> String {
        format!("{}/v{}", self.model.format, self.model.version)
    }
}

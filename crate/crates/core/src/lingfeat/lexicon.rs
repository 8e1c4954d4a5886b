//! Psycholinguistic category lexicon (LIWC-style format, open stand-in data).

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use super::tokenize::TokenStream;
use super::LingError;

const BUNDLED_LEXICON: &str = include_str!("../../assets/lexicon-open.json");

/// The eleven top-level categories, in registry order.
pub const CATEGORIES: [&str; 11] = [
    "affective",
    "social",
    "cognition",
    "perception",
    "biological",
    "drives",
    "temporal",
    "relativity",
    "informal",
    "function",
    "personal_concerns",
];

#[derive(Debug, Clone, Default)]
struct Category {
    words: HashSet<String>,
    stems: Vec<String>,
}

impl Category {
    fn matches(&self, word: &str) -> bool {
        self.words.contains(word) || self.stems.iter().any(|s| word.starts_with(s.as_str()))
    }
}

/// Word and stem sets for the eleven categories. Entries ending in `*` match
/// any word with that prefix.
#[derive(Debug, Clone)]
pub struct CategoryLexicon {
    categories: Vec<Category>,
}

/// Per-category matched word tokens and proportions of word tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryCounts {
    pub hits: [usize; 11],
    pub proportions: [f64; 11],
}

fn canonical(name: &str) -> String {
    name.trim().to_lowercase().replace(['-', ' '], "_")
}

impl CategoryLexicon {
    /// Builds a lexicon from a category -> entries map. Missing categories are
    /// empty; unknown category names are rejected.
    pub fn from_map(map: &BTreeMap<String, Vec<String>>) -> Result<Self, LingError> {
        let mut categories = vec![Category::default(); CATEGORIES.len()];
        for (name, entries) in map {
            let key = canonical(name);
            let idx = CATEGORIES.iter().position(|c| *c == key).ok_or_else(|| LingError::Lexicon(format!("unknown category {name:?}")))?;
            for e in entries {
                let e = e.trim().to_lowercase();
                if let Some(stem) = e.strip_suffix('*') {
                    if stem.is_empty() {
                        return Err(LingError::Lexicon(format!("empty stem in category {name:?}")));
                    }
                    categories[idx].stems.push(stem.to_string());
                } else if !e.is_empty() {
                    categories[idx].words.insert(e);
                }
            }
        }
        Ok(Self { categories })
    }

    pub fn from_json(text: &str) -> Result<Self, LingError> {
        let map: BTreeMap<String, Vec<String>> = serde_json::from_str(text).map_err(|e| LingError::Lexicon(e.to_string()))?;
        Self::from_map(&map)
    }

    pub fn load(path: &Path) -> Result<Self, LingError> {
        let text = std::fs::read_to_string(path).map_err(|e| LingError::Io { path: path.display().to_string(), source: e })?;
        Self::from_json(&text)
    }

    /// Small open stand-in lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn empty() -> Self {
        Self { categories: vec![Category::default(); CATEGORIES.len()] }
    }

    /// Counts word tokens matching each category. A token counts at most once
    /// per category; proportions are hits / word tokens (0 with no words).
    pub fn counts(&self, tokens: &TokenStream) -> CategoryCounts {
        let mut hits = [0usize; 11];
        let mut words = 0usize;
        for t in tokens.words() {
            words += 1;
            for (i, cat) in self.categories.iter().enumerate() {
                if cat.matches(&t.lower) {
                    hits[i] += 1;
                }
            }
        }
        let mut proportions = [0.0; 11];
        if words > 0 {
            for i in 0..11 {
                proportions[i] = hits[i] as f64 / words as f64;
            }
        }
        CategoryCounts { hits, proportions }
    }
}

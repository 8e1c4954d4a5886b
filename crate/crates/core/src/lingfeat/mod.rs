//! Linguistic feature extraction from transcript text.

pub mod extract;
pub mod lexicon;
pub mod registry;
pub mod standardize;
pub mod tagger;
pub mod tokenize;

pub use extract::{FeatureExtractor, FeatureVector};
pub use lexicon::{CategoryCounts, CategoryLexicon, CATEGORIES};
pub use registry::{feature_names, feature_registry, Dimension, FeatureDef, FeatureKind, FEATURE_COUNT, REGISTRY_VERSION};
pub use standardize::{read_feature_csv, write_feature_csv, FeatureTable, Standardizer};
pub use tagger::{PosTag, PosTags, RuleTagger, Tagger, TaggerModel};
pub use tokenize::{tokenize, FillerKind, FillerList, Token, TokenStream};

#[derive(Debug, thiserror::Error)]
pub enum LingError {
    #[error("transcript contains no tokens")]
    EmptyTranscript,
    #[error("tagger model: {0}")]
    TaggerModel(String),
    #[error("lexicon: {0}")]
    Lexicon(String),
    #[error("feature table: {0}")]
    Table(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Category counts for a text, using the default filler list.
pub fn liwc_counts(text: &str, lexicon: &CategoryLexicon) -> Result<CategoryCounts, LingError> {
    let ts = tokenize(text, &FillerList::default())?;
    Ok(lexicon.counts(&ts))
}

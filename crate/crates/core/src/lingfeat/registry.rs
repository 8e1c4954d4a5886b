//! The frozen feature registry: 110 named features in four dimensions.
//!
//! Registry version 1. Column order of every feature vector and feature CSV
//! follows [`REGISTRY`]. Changing a name, order or definition requires a new
//! registry version.

use serde::{Deserialize, Serialize};

pub const REGISTRY_VERSION: u32 = 1;
pub const FEATURE_COUNT: usize = 110;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    LexicalRichness,
    SyntacticComplexity,
    Fluency,
    Psycholinguistic,
}

/// How a feature behaves, which determines the properties tests can assert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// a/b with both sides extensive: in [0, 1] and unchanged when the text
    /// is duplicated.
    Proportion,
    /// Vocabulary-diversity ratio in [0, 1] that never increases when the
    /// text is duplicated.
    Diversity,
    /// Ratio in [0, 1] with no duplication guarantee.
    Ratio,
    /// Extensive count: >= 0 and doubles when the text is duplicated.
    Count,
    /// Non-negative integer statistic with no duplication guarantee.
    Tally,
    /// Finite real-valued statistic.
    Measure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeatureDef {
    pub name: &'static str,
    pub dimension: Dimension,
    pub kind: FeatureKind,
    pub definition: &'static str,
    /// Primary variant where word-level and bigram-level versions of a
    /// fluency measure coexist.
    pub nominal: bool,
}

const fn f(name: &'static str, dimension: Dimension, kind: FeatureKind, definition: &'static str) -> FeatureDef {
    FeatureDef { name, dimension, kind, definition, nominal: false }
}

const fn nominal(name: &'static str, dimension: Dimension, kind: FeatureKind, definition: &'static str) -> FeatureDef {
    FeatureDef { name, dimension, kind, definition, nominal: true }
}

use Dimension::{Fluency as FL, LexicalRichness as LR, Psycholinguistic as PL, SyntacticComplexity as SC};
use FeatureKind::*;

// N = word tokens, V = distinct lowercase word types, V_i = types occurring
// exactly i times. "Sentence" means a tokenizer sentence; "word sentence" one
// containing at least one word. Any a/b with b = 0 evaluates to 0.
pub static REGISTRY: [FeatureDef; FEATURE_COUNT] = [
    // lexical richness (24)
    f("word_count", LR, Count, "N"),
    f("type_count", LR, Tally, "V"),
    f("type_token_ratio", LR, Diversity, "distinct word types / word tokens"),
    f("root_ttr", LR, Measure, "V / sqrt(N)"),
    f("corrected_ttr", LR, Measure, "V / sqrt(2N)"),
    f("log_ttr", LR, Diversity, "ln V / ln N (0 when N < 2)"),
    f("mattr_5", LR, Ratio, "mean TTR over all 5-word windows (TTR when N < 5)"),
    f("mattr_10", LR, Ratio, "mean TTR over all 10-word windows (TTR when N < 10)"),
    f("mattr_20", LR, Ratio, "mean TTR over all 20-word windows (TTR when N < 20)"),
    f("mattr_50", LR, Ratio, "mean TTR over all 50-word windows (TTR when N < 50)"),
    f("brunet_index", LR, Measure, "N ^ (V ^ -0.165) (0 when N = 0)"),
    f("honore_statistic", LR, Measure, "100 ln N / (1 - V_1 / V) (0 when V_1 = V)"),
    f("hapax_count", LR, Tally, "V_1"),
    f("hapax_ratio", LR, Diversity, "V_1 / N"),
    f("hapax_type_ratio", LR, Diversity, "V_1 / V"),
    f("dis_legomena_count", LR, Tally, "V_2"),
    f("dis_legomena_ratio", LR, Ratio, "V_2 / N"),
    f("sichel_s", LR, Ratio, "V_2 / V"),
    f("yule_k", LR, Measure, "10^4 (sum_i i^2 V_i - N) / N^2"),
    f("mean_word_length", LR, Measure, "mean characters per word token"),
    f("long_word_ratio", LR, Proportion, "word tokens with >= 7 characters / N"),
    f("freq_band_top50_ratio", LR, Proportion, "word tokens in high-frequency list ranks 1-50 / N"),
    f("freq_band_51_200_ratio", LR, Proportion, "word tokens in high-frequency list ranks 51-200 / N"),
    f("freq_band_rare_ratio", LR, Proportion, "word tokens outside the 200-word high-frequency list / N"),
    // syntactic complexity (39)
    f("pos_noun_ratio", SC, Proportion, "NOUN tokens / all tokens"),
    f("pos_verb_ratio", SC, Proportion, "VERB tokens / all tokens"),
    f("pos_adj_ratio", SC, Proportion, "ADJ tokens / all tokens"),
    f("pos_adv_ratio", SC, Proportion, "ADV tokens / all tokens"),
    f("pos_pron_ratio", SC, Proportion, "PRON tokens / all tokens"),
    f("pos_det_ratio", SC, Proportion, "DET tokens / all tokens"),
    f("pos_adp_ratio", SC, Proportion, "ADP tokens / all tokens"),
    f("pos_conj_ratio", SC, Proportion, "CONJ tokens / all tokens"),
    f("pos_num_ratio", SC, Proportion, "NUM tokens / all tokens"),
    f("pos_part_ratio", SC, Proportion, "PART tokens / all tokens"),
    f("pos_intj_ratio", SC, Proportion, "INTJ tokens / all tokens"),
    f("pos_punct_ratio", SC, Proportion, "PUNCT tokens / all tokens"),
    f("pos_x_ratio", SC, Proportion, "X tokens / all tokens"),
    f("tag_bigram_det_noun", SC, Proportion, "DET-NOUN tag bigrams / tag bigrams"),
    f("tag_bigram_adj_noun", SC, Proportion, "ADJ-NOUN tag bigrams / tag bigrams"),
    f("tag_bigram_det_adj", SC, Proportion, "DET-ADJ tag bigrams / tag bigrams"),
    f("tag_bigram_pron_verb", SC, Proportion, "PRON-VERB tag bigrams / tag bigrams"),
    f("tag_bigram_noun_verb", SC, Proportion, "NOUN-VERB tag bigrams / tag bigrams"),
    f("tag_bigram_verb_det", SC, Proportion, "VERB-DET tag bigrams / tag bigrams"),
    f("tag_bigram_verb_adp", SC, Proportion, "VERB-ADP tag bigrams / tag bigrams"),
    f("tag_bigram_verb_pron", SC, Proportion, "VERB-PRON tag bigrams / tag bigrams"),
    f("tag_bigram_verb_verb", SC, Proportion, "VERB-VERB tag bigrams / tag bigrams"),
    f("tag_bigram_verb_adv", SC, Proportion, "VERB-ADV tag bigrams / tag bigrams"),
    f("tag_bigram_adp_det", SC, Proportion, "ADP-DET tag bigrams / tag bigrams"),
    f("tag_bigram_noun_adp", SC, Proportion, "NOUN-ADP tag bigrams / tag bigrams"),
    f("tag_bigram_noun_conj", SC, Proportion, "NOUN-CONJ tag bigrams / tag bigrams"),
    f("tag_bigram_conj_pron", SC, Proportion, "CONJ-PRON tag bigrams / tag bigrams"),
    f("tag_bigram_noun_noun", SC, Proportion, "NOUN-NOUN tag bigrams / tag bigrams"),
    f("tag_bigram_intj_intj", SC, Proportion, "INTJ-INTJ tag bigrams / tag bigrams"),
    f("sentence_count", SC, Count, "tokenizer sentences"),
    f("mean_sentence_length", SC, Measure, "N / sentences"),
    f("max_sentence_length", SC, Tally, "most word tokens in one sentence"),
    f("sentence_length_std", SC, Measure, "population std of word tokens per sentence"),
    f("pronoun_noun_ratio", SC, Measure, "PRON tokens / NOUN tokens"),
    f("noun_verb_ratio", SC, Measure, "NOUN tokens / VERB tokens"),
    f("verbs_per_sentence", SC, Measure, "VERB tokens / sentences"),
    f("lexical_density", SC, Proportion, "NOUN+VERB+ADJ+ADV word tokens / N"),
    f("function_word_ratio", SC, Proportion, "DET+ADP+CONJ+PRON+PART word tokens / N"),
    f("determiner_noun_ratio", SC, Measure, "DET tokens / NOUN tokens"),
    // fluency (25)
    nominal("filler_count", FL, Count, "filler-flagged tokens"),
    f("filler_ratio", FL, Proportion, "filler-flagged tokens / N"),
    f("filled_pause_count", FL, Count, "filled-pause tokens (um, uh, er, ah, hm, mhm)"),
    f("filled_pause_ratio", FL, Proportion, "filled-pause tokens / N"),
    f("discourse_marker_count", FL, Count, "discourse-marker tokens (like, well, you know)"),
    f("discourse_marker_ratio", FL, Proportion, "discourse-marker tokens / N"),
    f("fillers_per_sentence", FL, Measure, "filler-flagged tokens / sentences"),
    nominal("immediate_repetition_count", FL, Count, "word tokens equal to the preceding word token of the same sentence"),
    f("immediate_repetition_ratio", FL, Proportion, "immediate_repetition_count / N"),
    nominal(
        "gapped_repetition_count",
        FL,
        Count,
        "word tokens, not immediate repeats, equal to a word 2-5 words earlier in the same sentence",
    ),
    f("gapped_repetition_ratio", FL, Proportion, "gapped_repetition_count / N"),
    f("bigram_immediate_repetition_count", FL, Count, "word bigrams repeated back to back within a sentence"),
    f("bigram_gapped_repetition_count", FL, Count, "word bigrams equal to a bigram starting 3-8 words earlier in the same sentence"),
    f("repetition_ratio", FL, Proportion, "(immediate + gapped word repetitions) / N"),
    f("repeated_content_word_ratio", FL, Ratio, "content-tagged word tokens already seen as content words / content word tokens"),
    f("incomplete_sentence_count", FL, Count, "word sentences lacking a VERB tag or a terminator"),
    f("incomplete_sentence_ratio", FL, Proportion, "incomplete sentences / word sentences"),
    f("mean_utterance_length", FL, Measure, "mean word tokens per punctuation-delimited segment"),
    f("short_sentence_ratio", FL, Proportion, "word sentences with <= 3 words / word sentences"),
    f("long_sentence_ratio", FL, Proportion, "word sentences with >= 15 words / word sentences"),
    f("question_count", FL, Count, "tokens containing '?'"),
    f("and_ratio", FL, Proportion, "tokens 'and' / N"),
    f("and_initial_sentence_ratio", FL, Proportion, "word sentences whose first word is 'and' / word sentences"),
    f("fragment_word_ratio", FL, Proportion, "one-letter word tokens other than 'a' and 'i' / N"),
    f("uncertainty_phrase_count", FL, Count, "within-sentence matches of: i do n't know | i guess | i think | not sure | maybe"),
    // psycholinguistic (22)
    f("liwc_affective_ratio", PL, Proportion, "affective-category word tokens / N"),
    f("liwc_social_ratio", PL, Proportion, "social-category word tokens / N"),
    f("liwc_cognition_ratio", PL, Proportion, "cognition-category word tokens / N"),
    f("liwc_perception_ratio", PL, Proportion, "perception-category word tokens / N"),
    f("liwc_biological_ratio", PL, Proportion, "biological-category word tokens / N"),
    f("liwc_drives_ratio", PL, Proportion, "drives-category word tokens / N"),
    f("liwc_temporal_ratio", PL, Proportion, "temporal-category word tokens / N"),
    f("liwc_relativity_ratio", PL, Proportion, "relativity-category word tokens / N"),
    f("liwc_informal_ratio", PL, Proportion, "informal-category word tokens / N"),
    f("liwc_function_ratio", PL, Proportion, "function-category word tokens / N"),
    f("liwc_personal_concerns_ratio", PL, Proportion, "personal-concerns-category word tokens / N"),
    f("liwc_affective_count", PL, Count, "affective-category word tokens"),
    f("liwc_social_count", PL, Count, "social-category word tokens"),
    f("liwc_cognition_count", PL, Count, "cognition-category word tokens"),
    f("liwc_perception_count", PL, Count, "perception-category word tokens"),
    f("liwc_biological_count", PL, Count, "biological-category word tokens"),
    f("liwc_drives_count", PL, Count, "drives-category word tokens"),
    f("liwc_temporal_count", PL, Count, "temporal-category word tokens"),
    f("liwc_relativity_count", PL, Count, "relativity-category word tokens"),
    f("liwc_informal_count", PL, Count, "informal-category word tokens"),
    f("liwc_function_count", PL, Count, "function-category word tokens"),
    f("liwc_personal_concerns_count", PL, Count, "personal-concerns-category word tokens"),
];

/// The registry, in column order.
pub fn feature_registry() -> &'static [FeatureDef] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static FeatureDef> {
    REGISTRY.iter().find(|d| d.name == name)
}

pub fn index_of(name: &str) -> Option<usize> {
    REGISTRY.iter().position(|d| d.name == name)
}

pub fn feature_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|d| d.name).collect()
}

//! Computation of the 110 registry features for one transcript.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::lexicon::CategoryLexicon;
use super::registry::{FeatureDef, FEATURE_COUNT, REGISTRY};
use super::standardize::FeatureTable;
use super::tagger::{PosTag, PosTags, RuleTagger, Tagger};
use super::tokenize::{tokenize, FillerKind, FillerList, TokenStream};
use super::LingError;

/// The 110 feature values for one text, in registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        super::registry::index_of(name).map(|i| self.values[i])
    }

    pub fn names(&self) -> &'static [FeatureDef] {
        &REGISTRY
    }
}

// High-frequency English word list (ranked), used for the frequency bands.
const FREQ_TOP_50: [&str; 50] = [
    "the", "of", "and", "a", "to", "in", "is", "you", "that", "it", "he", "was", "for", "on", "are", "as", "with", "his", "they", "i",
    "at", "be", "this", "have", "from", "or", "one", "had", "by", "word", "but", "not", "what", "all", "were", "we", "when", "your", "can",
    "said", "there", "use", "an", "each", "which", "she", "do", "how", "their", "if",
];
const FREQ_51_200: [&str; 150] = [
    "will",
    "up",
    "other",
    "about",
    "out",
    "many",
    "then",
    "them",
    "these",
    "so",
    "some",
    "her",
    "would",
    "make",
    "like",
    "him",
    "into",
    "time",
    "has",
    "look",
    "two",
    "more",
    "write",
    "go",
    "see",
    "number",
    "no",
    "way",
    "could",
    "people",
    "my",
    "than",
    "first",
    "water",
    "been",
    "call",
    "who",
    "oil",
    "its",
    "now",
    "find",
    "long",
    "down",
    "day",
    "did",
    "get",
    "come",
    "made",
    "may",
    "part",
    "over",
    "new",
    "sound",
    "take",
    "only",
    "little",
    "work",
    "know",
    "place",
    "year",
    "live",
    "me",
    "back",
    "give",
    "most",
    "very",
    "after",
    "thing",
    "our",
    "just",
    "name",
    "good",
    "sentence",
    "man",
    "think",
    "say",
    "great",
    "where",
    "help",
    "through",
    "much",
    "before",
    "line",
    "right",
    "too",
    "mean",
    "old",
    "any",
    "same",
    "tell",
    "boy",
    "follow",
    "came",
    "want",
    "show",
    "also",
    "around",
    "form",
    "three",
    "small",
    "set",
    "put",
    "end",
    "does",
    "another",
    "well",
    "large",
    "must",
    "big",
    "even",
    "such",
    "because",
    "turn",
    "here",
    "why",
    "ask",
    "went",
    "men",
    "read",
    "need",
    "land",
    "different",
    "home",
    "us",
    "move",
    "try",
    "kind",
    "hand",
    "picture",
    "again",
    "change",
    "off",
    "play",
    "spell",
    "air",
    "away",
    "animal",
    "house",
    "point",
    "page",
    "letter",
    "mother",
    "answer",
    "found",
    "study",
    "still",
    "learn",
    "should",
    "america",
    "world",
];

const TAG_BIGRAMS: [(PosTag, PosTag); 16] = [
    (PosTag::Det, PosTag::Noun),
    (PosTag::Adj, PosTag::Noun),
    (PosTag::Det, PosTag::Adj),
    (PosTag::Pron, PosTag::Verb),
    (PosTag::Noun, PosTag::Verb),
    (PosTag::Verb, PosTag::Det),
    (PosTag::Verb, PosTag::Adp),
    (PosTag::Verb, PosTag::Pron),
    (PosTag::Verb, PosTag::Verb),
    (PosTag::Verb, PosTag::Adv),
    (PosTag::Adp, PosTag::Det),
    (PosTag::Noun, PosTag::Adp),
    (PosTag::Noun, PosTag::Conj),
    (PosTag::Conj, PosTag::Pron),
    (PosTag::Noun, PosTag::Noun),
    (PosTag::Intj, PosTag::Intj),
];

const UNCERTAINTY_PHRASES: [&[&str]; 5] = [&["i", "do", "n't", "know"], &["i", "guess"], &["i", "think"], &["not", "sure"], &["maybe"]];

const MATTR_WINDOWS: [usize; 4] = [5, 10, 20, 50];

/// Collects feature values and remembers which ones hit a zero denominator.
struct Sink {
    values: Vec<(&'static str, f64)>,
    degenerate: Vec<&'static str>,
}

impl Sink {
    fn put(&mut self, name: &'static str, v: f64) {
        self.values.push((name, v));
    }

    fn ratio(&mut self, name: &'static str, num: f64, den: f64) {
        if den == 0.0 {
            self.degenerate.push(name);
            self.put(name, 0.0);
        } else {
            self.put(name, num / den);
        }
    }
}

/// Feature extractor: tokenizer fillers, tagger and category lexicon, all
/// shared read-only.
pub struct FeatureExtractor {
    pub fillers: FillerList,
    pub lexicon: CategoryLexicon,
    tagger: Box<dyn Tagger>,
    top50: HashSet<&'static str>,
    band2: HashSet<&'static str>,
}

impl FeatureExtractor {
    pub fn new(lexicon: CategoryLexicon, tagger: Box<dyn Tagger>, fillers: FillerList) -> Self {
        Self { fillers, lexicon, tagger, top50: FREQ_TOP_50.into_iter().collect(), band2: FREQ_51_200.into_iter().collect() }
    }

    /// Bundled lexicon, bundled rule tagger, default fillers.
    pub fn bundled() -> Self {
        Self::new(CategoryLexicon::bundled(), Box::new(RuleTagger::bundled()), FillerList::default())
    }

    pub fn tagger_name(&self) -> String {
        self.tagger.name()
    }

    pub fn tokenize(&self, text: &str) -> Result<TokenStream, LingError> {
        tokenize(text, &self.fillers)
    }

    /// Extracts the feature vector for one text. `id` is only used in log
    /// messages.
    pub fn extract(&self, id: &str, text: &str) -> Result<FeatureVector, LingError> {
        let ts = self.tokenize(text)?;
        let tags = self.tagger.tag(&ts);
        let mut sink = Sink { values: Vec::with_capacity(FEATURE_COUNT), degenerate: Vec::new() };
        self.richness(&ts, &mut sink);
        self.syntax(&ts, &tags, &mut sink);
        self.fluency(&ts, &tags, &mut sink);
        self.psycholinguistic(&ts, &mut sink);
        if !sink.degenerate.is_empty() {
            tracing::warn!(
                transcript = id,
                features = ?sink.degenerate,
                "zero denominator; feature set to 0"
            );
        }
        debug_assert_eq!(sink.values.len(), FEATURE_COUNT);
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for (def, (name, v)) in REGISTRY.iter().zip(&sink.values) {
            assert_eq!(def.name, *name, "feature computation out of registry order");
            values.push(if v.is_finite() { *v } else { 0.0 });
        }
        Ok(FeatureVector { values })
    }

    /// Extracts features for many texts in parallel; output order follows
    /// input order.
    pub fn extract_many(&self, items: &[(&str, &str)]) -> Result<Vec<FeatureVector>, LingError> {
        items.par_iter().map(|(id, text)| self.extract(id, text)).collect()
    }

    /// Feature table for `items`, rows in input order.
    pub fn table(&self, items: &[(&str, &str)]) -> Result<FeatureTable, LingError> {
        let rows = self.extract_many(items)?;
        Ok(FeatureTable { ids: items.iter().map(|(id, _)| id.to_string()).collect(), rows: rows.into_iter().map(|r| r.values).collect() })
    }

    fn richness(&self, ts: &TokenStream, s: &mut Sink) {
        let words: Vec<&str> = ts.words().map(|t| t.lower.as_str()).collect();
        let n = words.len() as f64;
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for w in &words {
            *freq.entry(w).or_default() += 1;
        }
        let v = freq.len() as f64;
        let mut spectrum: HashMap<usize, usize> = HashMap::new();
        for &c in freq.values() {
            *spectrum.entry(c).or_default() += 1;
        }
        let v1 = *spectrum.get(&1).unwrap_or(&0) as f64;
        let v2 = *spectrum.get(&2).unwrap_or(&0) as f64;

        s.put("word_count", n);
        s.put("type_count", v);
        s.ratio("type_token_ratio", v, n);
        s.ratio("root_ttr", v, n.sqrt());
        s.ratio("corrected_ttr", v, (2.0 * n).sqrt());
        if n < 2.0 {
            s.put("log_ttr", 0.0);
        } else {
            s.put("log_ttr", v.ln() / n.ln());
        }
        for (w, name) in MATTR_WINDOWS.iter().zip(["mattr_5", "mattr_10", "mattr_20", "mattr_50"]) {
            s.put(name, mattr(&words, *w));
        }
        s.put("brunet_index", if n == 0.0 { 0.0 } else { n.powf(v.powf(-0.165)) });
        if v1 == v {
            s.put("honore_statistic", 0.0);
        } else {
            s.put("honore_statistic", 100.0 * n.ln() / (1.0 - v1 / v));
        }
        s.put("hapax_count", v1);
        s.ratio("hapax_ratio", v1, n);
        s.ratio("hapax_type_ratio", v1, v);
        s.put("dis_legomena_count", v2);
        s.ratio("dis_legomena_ratio", v2, n);
        s.ratio("sichel_s", v2, v);
        let sum_i2: f64 = spectrum.iter().map(|(&i, &vi)| (i * i * vi) as f64).sum();
        s.ratio("yule_k", 1e4 * (sum_i2 - n), n * n);
        let chars: usize = words.iter().map(|w| w.chars().count()).sum();
        s.ratio("mean_word_length", chars as f64, n);
        let long = words.iter().filter(|w| w.chars().count() >= 7).count();
        s.ratio("long_word_ratio", long as f64, n);
        let top = words.iter().filter(|w| self.top50.contains(*w)).count();
        let mid = words.iter().filter(|w| self.band2.contains(*w)).count();
        s.ratio("freq_band_top50_ratio", top as f64, n);
        s.ratio("freq_band_51_200_ratio", mid as f64, n);
        s.ratio("freq_band_rare_ratio", (words.len() - top - mid) as f64, n);
    }

    fn syntax(&self, ts: &TokenStream, tags: &PosTags, s: &mut Sink) {
        let total = ts.len() as f64;
        let mut tag_counts: HashMap<PosTag, usize> = HashMap::new();
        for t in &tags.0 {
            *tag_counts.entry(*t).or_default() += 1;
        }
        let count = |t: PosTag| *tag_counts.get(&t).unwrap_or(&0) as f64;
        for (tag, name) in PosTag::ALL.iter().zip([
            "pos_noun_ratio",
            "pos_verb_ratio",
            "pos_adj_ratio",
            "pos_adv_ratio",
            "pos_pron_ratio",
            "pos_det_ratio",
            "pos_adp_ratio",
            "pos_conj_ratio",
            "pos_num_ratio",
            "pos_part_ratio",
            "pos_intj_ratio",
            "pos_punct_ratio",
            "pos_x_ratio",
        ]) {
            s.ratio(name, count(*tag), total);
        }

        // tag bigrams over consecutive non-punctuation tokens of a sentence
        let mut bigrams: HashMap<(PosTag, PosTag), usize> = HashMap::new();
        let mut n_bigrams = 0usize;
        for range in ts.sentences() {
            let seq: Vec<PosTag> = tags.0[range].iter().copied().filter(|t| *t != PosTag::Punct).collect();
            for w in seq.windows(2) {
                *bigrams.entry((w[0], w[1])).or_default() += 1;
                n_bigrams += 1;
            }
        }
        for ((a, b), name) in TAG_BIGRAMS.iter().zip([
            "tag_bigram_det_noun",
            "tag_bigram_adj_noun",
            "tag_bigram_det_adj",
            "tag_bigram_pron_verb",
            "tag_bigram_noun_verb",
            "tag_bigram_verb_det",
            "tag_bigram_verb_adp",
            "tag_bigram_verb_pron",
            "tag_bigram_verb_verb",
            "tag_bigram_verb_adv",
            "tag_bigram_adp_det",
            "tag_bigram_noun_adp",
            "tag_bigram_noun_conj",
            "tag_bigram_conj_pron",
            "tag_bigram_noun_noun",
            "tag_bigram_intj_intj",
        ]) {
            s.ratio(name, *bigrams.get(&(*a, *b)).unwrap_or(&0) as f64, n_bigrams as f64);
        }

        let sent_words: Vec<f64> = ts.sentences().map(|r| ts.tokens[r].iter().filter(|t| t.is_word).count() as f64).collect();
        let n_sent = sent_words.len() as f64;
        let n_words = ts.word_count() as f64;
        s.put("sentence_count", n_sent);
        s.ratio("mean_sentence_length", n_words, n_sent);
        s.put("max_sentence_length", sent_words.iter().copied().fold(0.0, f64::max));
        s.put("sentence_length_std", crate::stats::population_std(&sent_words));
        s.ratio("pronoun_noun_ratio", count(PosTag::Pron), count(PosTag::Noun));
        s.ratio("noun_verb_ratio", count(PosTag::Noun), count(PosTag::Verb));
        s.ratio("verbs_per_sentence", count(PosTag::Verb), n_sent);
        let (mut content, mut function) = (0usize, 0usize);
        for (t, tag) in ts.tokens.iter().zip(&tags.0) {
            if t.is_word && tag.is_content() {
                content += 1;
            }
            if t.is_word && tag.is_function() {
                function += 1;
            }
        }
        s.ratio("lexical_density", content as f64, n_words);
        s.ratio("function_word_ratio", function as f64, n_words);
        s.ratio("determiner_noun_ratio", count(PosTag::Det), count(PosTag::Noun));
    }

    fn fluency(&self, ts: &TokenStream, tags: &PosTags, s: &mut Sink) {
        let n = ts.word_count() as f64;
        let fillers = ts.tokens.iter().filter(|t| t.is_filler()).count() as f64;
        let pauses = ts.tokens.iter().filter(|t| t.filler == Some(FillerKind::FilledPause)).count() as f64;
        let markers = ts.tokens.iter().filter(|t| t.filler == Some(FillerKind::DiscourseMarker)).count() as f64;
        let n_sent = ts.sentence_count() as f64;
        s.put("filler_count", fillers);
        s.ratio("filler_ratio", fillers, n);
        s.put("filled_pause_count", pauses);
        s.ratio("filled_pause_ratio", pauses, n);
        s.put("discourse_marker_count", markers);
        s.ratio("discourse_marker_ratio", markers, n);
        s.ratio("fillers_per_sentence", fillers, n_sent);

        let (mut immediate, mut gapped, mut bi_immediate, mut bi_gapped) = (0usize, 0, 0, 0);
        let mut uncertainty = 0usize;
        let (mut word_sentences, mut incomplete, mut short, mut long, mut and_initial) = (0usize, 0, 0, 0, 0);
        for range in ts.sentences() {
            let toks = &ts.tokens[range.clone()];
            let words: Vec<&str> = toks.iter().filter(|t| t.is_word).map(|t| t.lower.as_str()).collect();
            for i in 1..words.len() {
                if words[i] == words[i - 1] {
                    immediate += 1;
                } else if (2..=5).any(|gap| i >= gap && words[i - gap] == words[i]) {
                    gapped += 1;
                }
            }
            for i in 0..words.len().saturating_sub(3) {
                if words[i] == words[i + 2] && words[i + 1] == words[i + 3] {
                    bi_immediate += 1;
                }
            }
            for i in 3..words.len().saturating_sub(1) {
                let hit = (3..=8).any(|gap| i >= gap && words[i - gap] == words[i] && words[i - gap + 1] == words[i + 1]);
                if hit {
                    bi_gapped += 1;
                }
            }
            for phrase in UNCERTAINTY_PHRASES {
                uncertainty += words.windows(phrase.len()).filter(|w| w == &phrase).count();
            }
            if words.is_empty() {
                continue;
            }
            word_sentences += 1;
            let has_verb = tags.0[range].iter().any(|t| *t == PosTag::Verb);
            let terminated = toks.last().map(|t| t.is_terminator()).unwrap_or(false);
            if !has_verb || !terminated {
                incomplete += 1;
            }
            if words.len() <= 3 {
                short += 1;
            }
            if words.len() >= 15 {
                long += 1;
            }
            if words[0] == "and" {
                and_initial += 1;
            }
        }
        s.put("immediate_repetition_count", immediate as f64);
        s.ratio("immediate_repetition_ratio", immediate as f64, n);
        s.put("gapped_repetition_count", gapped as f64);
        s.ratio("gapped_repetition_ratio", gapped as f64, n);
        s.put("bigram_immediate_repetition_count", bi_immediate as f64);
        s.put("bigram_gapped_repetition_count", bi_gapped as f64);
        s.ratio("repetition_ratio", (immediate + gapped) as f64, n);

        let mut seen: HashSet<&str> = HashSet::new();
        let (mut content, mut repeated) = (0usize, 0usize);
        for (t, tag) in ts.tokens.iter().zip(&tags.0) {
            if t.is_word && tag.is_content() {
                content += 1;
                if !seen.insert(t.lower.as_str()) {
                    repeated += 1;
                }
            }
        }
        s.ratio("repeated_content_word_ratio", repeated as f64, content as f64);
        s.put("incomplete_sentence_count", incomplete as f64);
        s.ratio("incomplete_sentence_ratio", incomplete as f64, word_sentences as f64);

        let mut segments: Vec<usize> = Vec::new();
        let mut current = 0usize;
        for t in &ts.tokens {
            if t.is_word {
                current += 1;
            } else if t.is_punct() {
                if current > 0 {
                    segments.push(current);
                }
                current = 0;
            }
        }
        if current > 0 {
            segments.push(current);
        }
        s.ratio("mean_utterance_length", segments.iter().sum::<usize>() as f64, segments.len() as f64);
        s.ratio("short_sentence_ratio", short as f64, word_sentences as f64);
        s.ratio("long_sentence_ratio", long as f64, word_sentences as f64);
        s.put("question_count", ts.tokens.iter().filter(|t| t.surface.contains('?')).count() as f64);
        let ands = ts.tokens.iter().filter(|t| t.lower == "and").count();
        s.ratio("and_ratio", ands as f64, n);
        s.ratio("and_initial_sentence_ratio", and_initial as f64, word_sentences as f64);
        let fragments = ts
            .words()
            .filter(|t| t.lower.chars().count() == 1 && t.lower.chars().all(char::is_alphabetic) && t.lower != "a" && t.lower != "i")
            .count();
        s.ratio("fragment_word_ratio", fragments as f64, n);
        s.put("uncertainty_phrase_count", uncertainty as f64);
    }

    fn psycholinguistic(&self, ts: &TokenStream, s: &mut Sink) {
        let counts = self.lexicon.counts(ts);
        let n = ts.word_count() as f64;
        const RATIO_NAMES: [&str; 11] = [
            "liwc_affective_ratio",
            "liwc_social_ratio",
            "liwc_cognition_ratio",
            "liwc_perception_ratio",
            "liwc_biological_ratio",
            "liwc_drives_ratio",
            "liwc_temporal_ratio",
            "liwc_relativity_ratio",
            "liwc_informal_ratio",
            "liwc_function_ratio",
            "liwc_personal_concerns_ratio",
        ];
        const COUNT_NAMES: [&str; 11] = [
            "liwc_affective_count",
            "liwc_social_count",
            "liwc_cognition_count",
            "liwc_perception_count",
            "liwc_biological_count",
            "liwc_drives_count",
            "liwc_temporal_count",
            "liwc_relativity_count",
            "liwc_informal_count",
            "liwc_function_count",
            "liwc_personal_concerns_count",
        ];
        for (i, name) in RATIO_NAMES.iter().enumerate() {
            s.ratio(name, counts.hits[i] as f64, n);
        }
        for (i, name) in COUNT_NAMES.iter().enumerate() {
            s.put(name, counts.hits[i] as f64);
        }
    }
}

/// Moving-average type-token ratio over windows of `w` words.
fn mattr(words: &[&str], w: usize) -> f64 {
    if words.is_empty() {
        return 0.0;
    }
    if words.len() < w {
        let types: HashSet<&&str> = words.iter().collect();
        return types.len() as f64 / words.len() as f64;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for word in &words[..w] {
        *counts.entry(word).or_default() += 1;
    }
    let mut sum = counts.len() as f64 / w as f64;
    for i in w..words.len() {
        *counts.entry(words[i]).or_default() += 1;
        let out = words[i - w];
        let c = counts.get_mut(out).expect("window word present");
        *c -= 1;
        if *c == 0 {
            counts.remove(out);
        }
        sum += counts.len() as f64 / w as f64;
    }
    sum / (words.len() - w + 1) as f64
}

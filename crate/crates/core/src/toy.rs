//! Small templated corpus for smoke tests and demos: fluent descriptions
//! labelled Control, disfluent ones labelled Case. Text is assembled from
//! fixed sentence pools with a seeded RNG, so a (shape, seed) pair always
//! yields the same corpus.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Label, Split, Transcript};
use crate::embeddings::{EmbeddingStore, PseudoEmbedder};

const FLUENT: &[&str] = &[
    "In this kitchen scene a young boy is standing on a wobbly stool while he reaches into the cookie jar.",
    "The stool is tipping over, so he is about to fall backwards onto the floor.",
    "His sister stands beside him with her hand raised, quietly asking for a cookie of her own.",
    "Meanwhile their mother is drying a plate at the sink and seems completely unaware of the children.",
    "Water is overflowing from the sink and splashing onto the floor around her feet.",
    "Through the open window you can see a garden path and a neighbouring house.",
    "The curtains are drawn back, and the afternoon light falls across the counter.",
    "There are two cups and a plate resting on the counter next to the sink.",
    "The mother appears distracted, perhaps daydreaming while she finishes the dishes.",
    "The girl is holding a finger to her lips as if warning her brother to keep quiet.",
    "Because the faucet was left running, the puddle keeps spreading across the tiles.",
    "The cupboard door above the counter has been left wide open.",
    "It looks like an ordinary household moment that is about to turn into a small disaster.",
    "The boy seems to be handing a cookie down to his sister while balancing precariously.",
    "Although the mother is standing right there, she hasn't noticed the overflowing water.",
    "The kitchen is tidy apart from the spreading water and the children's mischief.",
    "Outside, the lawn looks freshly mown and a few shrubs line the walkway.",
    "The woman is wearing an apron, which suggests she has been cooking or cleaning.",
    "Everything in the picture suggests a busy afternoon in a suburban home.",
    "If nobody intervenes soon, both the stool and the sink will cause trouble.",
];

const DISFLUENT: &[&str] = &[
    "the boy is um on the thing",
    "he's he's getting the uh cookies",
    "and the the girl is there",
    "the lady is um washing",
    "water is uh going down",
    "there's a there's a thing there",
    "I don't know what that is",
    "the um the stool is uh",
    "she's doing the the dishes",
    "and uh the water",
    "the boy the boy is falling",
    "and that thing over there",
    "uh what else",
    "there's a window I think",
    "the girl wants one um",
    "it's um it's the kitchen",
];

const FILLERS: &[&str] = &["um", "uh", "er", "well"];

/// Class sizes per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyShape {
    pub train: (usize, usize),
    pub validation: (usize, usize),
    pub test: (usize, usize),
}

impl ToyShape {
    /// 60 + 60 transcripts split 24/18/18 per class.
    pub const DEFAULT: ToyShape = ToyShape { train: (24, 24), validation: (18, 18), test: (18, 18) };
    /// (case, control) counts of the reference cohort: 116 / 50 / 71.
    pub const FULL: ToyShape = ToyShape { train: (60, 56), validation: (27, 23), test: (35, 36) };
}

fn fluent_text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(6..=10);
    let mut picks: Vec<&str> = FLUENT.choose_multiple(rng, n).copied().collect();
    picks.shuffle(rng);
    picks.join(" ")
}

fn disfluent_text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(5..=9);
    let mut out = Vec::new();
    for _ in 0..n {
        let mut words: Vec<String> = DISFLUENT.choose(rng).expect("pool").split(' ').map(String::from).collect();
        if rng.random_bool(0.4) {
            let at = rng.random_range(0..=words.len());
            words.insert(at, FILLERS.choose(rng).expect("fillers").to_string());
        }
        if rng.random_bool(0.2) {
            let at = rng.random_range(0..words.len());
            let w = words[at].clone();
            words.insert(at, w);
        }
        out.push(format!("{}.", words.join(" ")));
    }
    out.join(" ")
}

/// Generates the toy corpus. Ids are `toy-<split>-<label>-<nn>`.
pub fn toy_corpus(shape: ToyShape, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ts = Vec::new();
    for (split, (n_case, n_control)) in [(Split::Train, shape.train), (Split::Validation, shape.validation), (Split::Test, shape.test)] {
        for (label, n) in [(Label::Case, n_case), (Label::Control, n_control)] {
            for i in 0..n {
                let text = match label {
                    Label::Case => disfluent_text(&mut rng),
                    Label::Control => fluent_text(&mut rng),
                };
                ts.push(Transcript::new(format!("toy-{split}-{label}-{i:03}"), label, split, text));
            }
        }
    }
    Corpus::new(ts).expect("toy ids are unique")
}

/// Pseudo-embeddings (384-d) for every transcript, keyed by id.
pub fn toy_embeddings(corpus: &Corpus) -> EmbeddingStore {
    let emb = PseudoEmbedder::default();
    let mut store = EmbeddingStore::new();
    for t in &corpus.transcripts {
        store.insert(emb.embed(&t.id, &t.text)).expect("fresh keys");
    }
    store
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::split_view;

    #[test]
    fn shape_and_determinism() {
        let c = toy_corpus(ToyShape::DEFAULT, 7);
        assert_eq!(c.len(), 120);
        assert_eq!(split_view(&c, Split::Train).len(), 48);
        assert_eq!(c.count(Split::Test, Some(Label::Case)), 18);
        assert_eq!(c, toy_corpus(ToyShape::DEFAULT, 7));
        assert_ne!(c, toy_corpus(ToyShape::DEFAULT, 8));
        let p = toy_corpus(ToyShape::FULL, 0);
        assert_eq!((p.len(), split_view(&p, Split::Train).len()), (237, 116));
    }

    #[test]
    fn classes_differ_in_fillers() {
        let c = toy_corpus(ToyShape::DEFAULT, 1);
        let has_um = |t: &Transcript| t.text.split_whitespace().any(|w| w.trim_matches('.') == "um" || w == "uh");
        let case_um = c.transcripts.iter().filter(|t| t.label == Label::Case).filter(|t| has_um(t)).count();
        let ctrl_um = c.transcripts.iter().filter(|t| t.label == Label::Control).filter(|t| has_um(t)).count();
        assert!(case_um > 50 && ctrl_um == 0, "{case_um} {ctrl_um}");
    }
}

//! Label-conditioned synthetic transcripts.
//!
//! Fine-tuning data are exported as chat records whose system turn combines
//! one of ten personas, a fixed task and the label's cue block; the model
//! training itself happens elsewhere. At generation time the neutral prompt
//! is used and the label reaches the model according to [`Conditioning`].
//! Accepted samples are validated, deduplicated and merged into the train
//! split at 1x to 5x its size.

mod client;
mod generate;
mod prompts;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use client::{response_text, ApiKind, ChatClient, ChatMessage, ChatRequest, ChatResponse, HttpChatClient, ProviderConfig};
pub use generate::{
    augment_training_set, content_hash, generate_synthetic, label_plan, preset, validate_sample, Conditioning, FinetuneRecord,
    GenerationOptions, GeneratorConfig, Rejection, SampleBounds, SampleProvenance, SampleStatus, SampleValidator, Sampling,
    SyntheticCorpus, SyntheticSample, PRESET_NAMES,
};
pub use prompts::{
    build_cued_prompt, build_finetune_prompt, build_inference_prompt, cue_hits, cue_lexicon, label_name, persona, PromptMode,
    PromptTemplate, CASE_CUES, CONTROL_CUES, GENERATION_REQUEST, PERSONA_COUNT,
};

use crate::corpus::{split_view, Corpus, Split};

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("role index {0} is out of range (0-9)")]
    RoleIndex(usize),
    #[error("invalid generation setting: {0}")]
    Config(String),
    #[error("train split is empty")]
    EmptyTrain,
    #[error("need {need} accepted synthetic samples, have {have}")]
    Insufficient { need: usize, have: usize },
    #[error("slot {slot} exhausted its retry budget ({open} slots still open); rejections: {reasons:?}")]
    RetryBudget { slot: usize, open: usize, reasons: Vec<String> },
    #[error("provider failure: {0}")]
    Provider(String),
    #[error("malformed synthetic corpus: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneExample {
    pub system: String,
    pub user: String,
    pub assistant: String,
    pub label: String,
}

/// One record per train transcript, in id order; transcript `i` gets persona
/// `i mod 10`.
pub fn finetune_examples(corpus: &Corpus) -> Result<Vec<FinetuneExample>, AugmentError> {
    let train = split_view(corpus, Split::Train);
    if train.is_empty() {
        return Err(AugmentError::EmptyTrain);
    }
    train
        .iter()
        .enumerate()
        .map(|(i, t)| {
            Ok(FinetuneExample {
                system: build_finetune_prompt(t.label, i % PERSONA_COUNT)?,
                user: GENERATION_REQUEST.into(),
                assistant: t.text.clone(),
                label: label_name(t.label).into(),
            })
        })
        .collect()
}

/// Writes [`finetune_examples`] as JSONL. Returns the number of records.
pub fn export_finetune_dataset(corpus: &Corpus, path: &Path) -> Result<usize, AugmentError> {
    let examples = finetune_examples(corpus)?;
    let mut buf = Vec::new();
    for e in &examples {
        serde_json::to_writer(&mut buf, e).map_err(|e| AugmentError::Io(e.to_string()))?;
        buf.push(b'\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| AugmentError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(&buf).map_err(|e| AugmentError::Io(format!("{}: {e}", path.display())))?;
    Ok(examples.len())
}

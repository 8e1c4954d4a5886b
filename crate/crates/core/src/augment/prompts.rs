use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::corpus::Label;

pub const PERSONA_COUNT: usize = 10;

const PERSONAS: [&str; PERSONA_COUNT] = [
    "You are a specialist in language and cognition who studies how older adults talk.",
    "You are a geriatric clinician who listens to patients describe everyday scenes.",
    "You are a speech-language pathologist who transcribes assessment sessions.",
    "You are a neuropsychologist who administers picture-description tasks.",
    "You are a clinical linguist who annotates spontaneous speech samples.",
    "You are a memory-clinic nurse who records what patients say during testing.",
    "You are a researcher in ageing who collects recordings of everyday speech.",
    "You are a neurologist who documents how patients narrate a picture.",
    "You are a transcriptionist who works on verbatim clinical recordings.",
    "You are a cognitive scientist who models how people put scenes into words.",
];

const NEUTRAL_PERSONA: &str = "You are an expert in how people describe pictures out loud.";

const TASK: &str = "Speak as an older adult who is describing the Cookie Theft picture to an examiner. \
The picture shows a kitchen: a boy standing on a stool reaches into a cookie jar, a girl reaches up \
beside him, and a woman dries a dish while water spills over the sink. Give only the words the \
speaker says, written as a verbatim transcript.";

/// Request sent as the user turn for every generation.
pub const GENERATION_REQUEST: &str = "Produce one transcript.";

const CONTROL_CUE_BLOCK: &str = "The speaker is cognitively healthy. The speech should show complex \
sentence structure, a varied vocabulary, fluent delivery and a well organised account of the scene.";

const CASE_CUE_BLOCK: &str = "The speaker is cognitively impaired. The speech should show repetition \
of words and ideas, frequent filler words, grammatical slips, vague word choices and a loosely \
organised account of the scene.";

/// Phrases that identify the Control cue block.
pub const CONTROL_CUES: &[&str] = &["cognitively healthy", "complex sentence", "varied vocabulary", "fluent", "well organised"];

/// Phrases that identify the Case cue block.
pub const CASE_CUES: &[&str] = &["cognitively impaired", "repetition", "filler", "grammatical slip", "vague word", "loosely organised"];

/// Every cue phrase of either label.
pub fn cue_lexicon() -> impl Iterator<Item = &'static str> {
    CONTROL_CUES.iter().chain(CASE_CUES).copied()
}

/// Cue phrases (lowercase match) found in `text`.
pub fn cue_hits(text: &str) -> Vec<&'static str> {
    let lower = text.to_lowercase();
    cue_lexicon().filter(|c| lower.contains(c)).collect()
}

/// Display name used in prompts and exported records.
pub fn label_name(label: Label) -> &'static str {
    match label {
        Label::Case => "ADRD",
        Label::Control => "Healthy",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    Finetune,
    Inference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub role_text: String,
    pub task_text: String,
    pub label_cues: Vec<(Label, String)>,
    pub mode: PromptMode,
}

impl PromptTemplate {
    pub fn finetune(role_index: usize) -> Result<Self, AugmentError> {
        let role = PERSONAS.get(role_index).ok_or(AugmentError::RoleIndex(role_index))?;
        Ok(Self {
            role_text: role.to_string(),
            task_text: TASK.into(),
            label_cues: vec![(Label::Case, CASE_CUE_BLOCK.into()), (Label::Control, CONTROL_CUE_BLOCK.into())],
            mode: PromptMode::Finetune,
        })
    }

    pub fn inference() -> Self {
        Self { role_text: NEUTRAL_PERSONA.into(), task_text: TASK.into(), label_cues: vec![], mode: PromptMode::Inference }
    }

    /// Persona, task and (fine-tune mode only) the cue block for `label`.
    pub fn render(&self, label: Option<Label>) -> String {
        let mut out = format!("{}\n\n{}", self.role_text, self.task_text);
        if let (PromptMode::Finetune, Some(l)) = (self.mode, label) {
            if let Some((_, cue)) = self.label_cues.iter().find(|(cl, _)| *cl == l) {
                out.push_str("\n\n");
                out.push_str(cue);
            }
        }
        out
    }
}

pub fn persona(role_index: usize) -> Result<&'static str, AugmentError> {
    PERSONAS.get(role_index).copied().ok_or(AugmentError::RoleIndex(role_index))
}

pub fn build_finetune_prompt(label: Label, role_index: usize) -> Result<String, AugmentError> {
    Ok(PromptTemplate::finetune(role_index)?.render(Some(label)))
}

pub fn build_inference_prompt() -> String {
    PromptTemplate::inference().render(None)
}

/// Role-varied prompt with the label's cue block, for endpoints that were
/// not fine-tuned.
pub fn build_cued_prompt(label: Label, role_index: usize) -> Result<String, AugmentError> {
    build_finetune_prompt(label, role_index)
}

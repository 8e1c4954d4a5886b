//! Zero-shot LLM classification of transcripts, scored like the other
//! classifiers.
//!
//! Responses are parsed leniently (code fences, single-quoted JSON, prose
//! around the object, a bare label word). A response that still yields no
//! label is `Unparseable`; it counts as a misclassification and its rate is
//! reported next to the metrics.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::augment::{ChatClient, ChatMessage, ChatRequest};
use crate::clsmetrics::{
    aggregate_seeds, confusion_f1, evaluation_curves, metric_set, EvalReport, MetricsError, ScoredPrediction, SeedEntry,
};
use crate::corpus::Label;

/// Classification instruction, used unchanged for zero-shot and fine-tuned
/// endpoints.
pub const CLASSIFICATION_PROMPT: &str = "You are an expert in cognitive health and language analysis. You will analyze a spoken language transcript from a person describing the 'cookie theft' picture. This is not written text but a transcription of spontaneous speech. Analyze the provided transcript and classify it into one of two categories: 'Healthy' for a healthy cognitive state or 'AD' for Alzheimer's disease. Provide only the label ('Healthy' or 'AD') as the output. Do not include explanations or additional text. The output should be in JSON format, like {'label': 'predicted label'}.";

/// Follow-up turn sent after an unparseable answer.
pub const FORMAT_REMINDER: &str = "Your answer could not be read. Reply with JSON only: {\"label\": \"Healthy\"} or {\"label\": \"AD\"}.";

#[derive(Debug, thiserror::Error)]
pub enum JudgeError {
    #[error("transcript {0:?} is empty")]
    EmptyTranscript(String),
    #[error("no transcripts to judge")]
    EmptySplit,
    #[error("temperature {0} is outside [0, 2]")]
    Temperature(f64),
    #[error("{id}: provider failure: {message}")]
    Provider { id: String, message: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JudgeLabel {
    Case,
    Control,
    Unparseable,
}

impl JudgeLabel {
    pub fn label(self) -> Option<Label> {
        match self {
            JudgeLabel::Case => Some(Label::Case),
            JudgeLabel::Control => Some(Label::Control),
            JudgeLabel::Unparseable => None,
        }
    }
}

impl From<Label> for JudgeLabel {
    fn from(l: Label) -> Self {
        match l {
            Label::Case => JudgeLabel::Case,
            Label::Control => JudgeLabel::Control,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    OpenWeight,
    Gpt,
}

impl ModelFamily {
    /// GPT-family model names start with "gpt" (any case) or "o1".
    pub fn of(model: &str) -> Self {
        let m = model.to_ascii_lowercase();
        let base = m.rsplit('/').next().unwrap_or(&m);
        if base.starts_with("gpt") || base.starts_with("o1") {
            ModelFamily::Gpt
        } else {
            ModelFamily::OpenWeight
        }
    }

    pub fn default_temperature(self) -> f64 {
        match self {
            ModelFamily::OpenWeight => 0.0,
            ModelFamily::Gpt => 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeConfig {
    pub model: String,
    pub temperature: f64,
    /// Re-asks after an unparseable answer.
    pub max_retries: u32,
    pub max_tokens: u32,
}

impl JudgeConfig {
    /// Temperature from the model family: 0 for open weights, 0.7 for GPT.
    pub fn for_model(model: &str) -> Self {
        Self { model: model.into(), temperature: ModelFamily::of(model).default_temperature(), max_retries: 2, max_tokens: 50 }
    }

    pub fn validate(&self) -> Result<(), JudgeError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(JudgeError::Temperature(self.temperature));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub id: String,
    pub raw_response: String,
    pub parsed_label: JudgeLabel,
    pub attempts: u32,
    pub latency_ms: u64,
}

pub fn build_classification_prompt(text: &str) -> Result<String, JudgeError> {
    if text.trim().is_empty() {
        return Err(JudgeError::EmptyTranscript(String::new()));
    }
    Ok(format!("{CLASSIFICATION_PROMPT}\n\nTranscript:\n{text}"))
}

/// Initial request for a transcript. Depends only on the config and text.
pub fn judge_request(cfg: &JudgeConfig, text: &str) -> Result<ChatRequest, JudgeError> {
    Ok(ChatRequest {
        model: cfg.model.clone(),
        messages: vec![ChatMessage::user(build_classification_prompt(text)?)],
        temperature: cfg.temperature,
        top_p: None,
        top_k: None,
        max_tokens: Some(cfg.max_tokens),
        seed: None,
    })
}

fn map_label(value: &str) -> Option<Label> {
    let v: String =
        value.trim().trim_matches(|c: char| c == '\'' || c == '"' || c == '.' || c == '`' || c == '*' || c.is_whitespace()).to_lowercase();
    match v.as_str() {
        "ad"
        | "adrd"
        | "alzheimer's disease"
        | "alzheimers disease"
        | "alzheimer's"
        | "alzheimer"
        | "dementia"
        | "cognitively impaired"
        | "impaired"
        | "case" => Some(Label::Case),
        "healthy" | "cognitively healthy" | "control" | "healthy control" | "hc" => Some(Label::Control),
        _ => None,
    }
}

/// Balanced `{...}` spans, honouring both quote styles.
fn brace_spans(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut start = None;
    let mut depth = 0usize;
    let mut quote: Option<u8> = None;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == q {
                quote = None;
            }
            continue;
        }
        match b {
            b'"' if depth > 0 => quote = Some(b'"'),
            b'{' => {
                if depth == 0 {
                    start = Some(i);
                }
                depth += 1;
            }
            b'}' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    out.push(&s[start.take().expect("open brace")..=i]);
                }
            }
            _ => {}
        }
    }
    out
}

/// Single-quoted pseudo-JSON to JSON: swaps quote characters that delimit
/// strings while leaving apostrophes inside double-quoted strings alone.
fn requote(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_double = false;
    let mut in_single = false;
    let chars: Vec<char> = s.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '"' if !in_single => {
                in_double = !in_double;
                out.push(c);
            }
            '\'' if !in_double => {
                // an apostrophe between letters inside a single-quoted value stays
                let prev = i.checked_sub(1).map(|j| chars[j]);
                let next = chars.get(i + 1).copied();
                if in_single && prev.is_some_and(char::is_alphabetic) && next.is_some_and(char::is_alphabetic) {
                    out.push(c);
                } else {
                    in_single = !in_single;
                    out.push('"');
                }
            }
            '"' => out.push_str("\\\""),
            _ => out.push(c),
        }
    }
    out
}

fn label_from_object(obj: &str) -> Option<Label> {
    let v: serde_json::Value = serde_json::from_str(obj).or_else(|_| serde_json::from_str(&requote(obj))).ok()?;
    let map = v.as_object()?;
    let (_, val) = map.iter().find(|(k, _)| {
        let k = k.trim().to_ascii_lowercase();
        k == "label" || k == "predicted label" || k == "predicted_label" || k == "prediction" || k == "class"
    })?;
    map_label(val.as_str()?)
}

/// `label: X` / `"label" = 'X'` without braces.
fn label_from_key_value(s: &str) -> Option<Label> {
    let lower = s.to_ascii_lowercase();
    let mut found = None;
    for (pos, _) in lower.match_indices("label") {
        let rest = &s[pos + 5..];
        let rest = rest.trim_start_matches(['"', '\'', ' ']);
        let Some(rest) = rest.strip_prefix([':', '=']) else { continue };
        let rest = rest.trim_start_matches([' ', '"', '\'']);
        let value: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '\'' || *c == ' ').collect::<String>();
        let value = value.trim_end_matches([' ', '\'']);
        // longest prefix of words that maps to a label
        let words: Vec<&str> = value.split(' ').collect();
        let hit = (1..=words.len().min(3)).rev().find_map(|k| map_label(&words[..k].join(" ")));
        match (found, hit) {
            (_, None) => {}
            (None, h) => found = h,
            (Some(a), Some(b)) if a != b => return None,
            _ => {}
        }
    }
    found
}

fn bare_word(s: &str) -> Option<Label> {
    let mut case = false;
    let mut control = false;
    for w in s.split(|c: char| !c.is_alphanumeric()) {
        match w.to_ascii_lowercase().as_str() {
            "ad" | "adrd" => case = true,
            "healthy" => control = true,
            _ => {}
        }
    }
    match (case, control) {
        (true, false) => Some(Label::Case),
        (false, true) => Some(Label::Control),
        _ => None,
    }
}

/// Extracts a label from an LLM answer. Total and deterministic.
///
/// Order: the first brace-delimited object carrying a label key (strict JSON,
/// then with single quotes converted), then a `label: X` pair, then a bare
/// label word if exactly one of {AD, Healthy} occurs.
pub fn parse_label(raw: &str) -> JudgeLabel {
    let text = raw.replace("```json", " ").replace("```JSON", " ").replace("```", " ");
    for obj in brace_spans(&text) {
        if let Some(l) = label_from_object(obj) {
            return l.into();
        }
    }
    if let Some(l) = label_from_key_value(&text) {
        return l.into();
    }
    match bare_word(&text) {
        Some(l) => l.into(),
        None => JudgeLabel::Unparseable,
    }
}

/// One transcript: asks, and re-asks with [`FORMAT_REMINDER`] while the
/// answer is unparseable and retries remain.
pub async fn judge<C: ChatClient>(client: &C, cfg: &JudgeConfig, id: &str, text: &str) -> Result<JudgeVerdict, JudgeError> {
    cfg.validate()?;
    let mut req = judge_request(cfg, text).map_err(|_| JudgeError::EmptyTranscript(id.into()))?;
    let start = Instant::now();
    let mut attempts = 0;
    loop {
        attempts += 1;
        let resp = client.complete(req.clone()).await.map_err(|e| JudgeError::Provider { id: id.into(), message: e.to_string() })?;
        let parsed = parse_label(&resp.text);
        if parsed != JudgeLabel::Unparseable || attempts > cfg.max_retries {
            return Ok(JudgeVerdict {
                id: id.into(),
                raw_response: resp.text,
                parsed_label: parsed,
                attempts,
                latency_ms: start.elapsed().as_millis() as u64,
            });
        }
        tracing::info!(id, attempts, "unparseable judge answer; re-asking");
        req.messages.push(ChatMessage { role: "assistant".into(), content: resp.text });
        req.messages.push(ChatMessage::user(FORMAT_REMINDER));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeItem {
    pub id: String,
    pub label: Label,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct JudgeOutcome {
    /// In input order.
    pub verdicts: Vec<JudgeVerdict>,
    pub report: EvalReport,
}

/// Hard prediction for scoring: an unparseable verdict becomes the class
/// opposite to the truth.
pub fn verdict_prediction(v: &JudgeVerdict, truth: Label) -> ScoredPrediction {
    let predicted = v.parsed_label.label().unwrap_or(match truth {
        Label::Case => Label::Control,
        Label::Control => Label::Case,
    });
    ScoredPrediction::new(v.id.clone(), truth, if predicted == Label::Case { 1.0 } else { 0.0 })
}

/// Report from verdicts already collected.
pub fn judge_report(items: &[JudgeItem], verdicts: &[JudgeVerdict], model: &str, dataset: &str) -> Result<EvalReport, JudgeError> {
    let preds: Vec<ScoredPrediction> = items.iter().zip(verdicts).map(|(it, v)| verdict_prediction(v, it.label)).collect();
    let metrics = metric_set(&preds)?;
    debug_assert_eq!(metrics["f1"], confusion_f1(&preds, 0.5)?.f1);
    let n_unparseable = verdicts.iter().filter(|v| v.parsed_label == JudgeLabel::Unparseable).count();
    let aggregate = aggregate_seeds(std::slice::from_ref(&metrics))?;
    Ok(EvalReport {
        model_kind: format!("llm-judge:{model}"),
        dataset: dataset.into(),
        per_seed: vec![SeedEntry { seed: 0, best_epoch: None, metrics }],
        aggregate,
        curves: evaluation_curves(&preds),
        predictions: preds,
        extra: BTreeMap::from([
            ("unparseable".to_string(), n_unparseable as f64),
            ("unparseable_rate".to_string(), n_unparseable as f64 / verdicts.len() as f64),
            ("mean_attempts".to_string(), verdicts.iter().map(|v| v.attempts as f64).sum::<f64>() / verdicts.len() as f64),
        ]),
    })
}

/// Judges every item concurrently (the client enforces its own limits) and
/// scores the verdicts.
pub async fn evaluate_judge<C: ChatClient>(
    client: Arc<C>,
    cfg: &JudgeConfig,
    items: &[JudgeItem],
    dataset: &str,
) -> Result<JudgeOutcome, JudgeError> {
    if items.is_empty() {
        return Err(JudgeError::EmptySplit);
    }
    cfg.validate()?;
    let mut set = tokio::task::JoinSet::new();
    for (i, it) in items.iter().enumerate() {
        let (c, cfg, id, text) = (Arc::clone(&client), cfg.clone(), it.id.clone(), it.text.clone());
        set.spawn(async move { (i, judge(&*c, &cfg, &id, &text).await) });
    }
    let mut slots: Vec<Option<JudgeVerdict>> = vec![None; items.len()];
    while let Some(j) = set.join_next().await {
        let (i, r) = j.map_err(|e| JudgeError::Provider { id: String::new(), message: e.to_string() })?;
        slots[i] = Some(r?);
    }
    let verdicts: Vec<JudgeVerdict> = slots.into_iter().map(|v| v.expect("every item judged")).collect();
    let report = judge_report(items, &verdicts, &cfg.model, dataset)?;
    Ok(JudgeOutcome { verdicts, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::ChatResponse;
    use crate::net::NetError;

    #[test]
    fn prompt_layout() {
        let p = build_classification_prompt("well the boy is up there").unwrap();
        assert!(p.contains("'cookie theft'"));
        assert!(p.ends_with("Transcript:\nwell the boy is up there"));
        assert!(crate::augment::cue_hits(CLASSIFICATION_PROMPT).is_empty());
        assert!(build_classification_prompt("  ").is_err());
    }

    #[test]
    fn temperature_policy() {
        assert_eq!(JudgeConfig::for_model("llama-3.1-8b").temperature, 0.0);
        assert_eq!(JudgeConfig::for_model("gpt-4o-2024-08-06").temperature, 0.7);
        assert_eq!(JudgeConfig::for_model("openai/GPT-4o").temperature, 0.7);
    }

    #[test]
    fn core_parse_examples() {
        assert_eq!(parse_label("{'label': 'AD'}"), JudgeLabel::Case);
        assert_eq!(parse_label("```json\n{\"label\": \"Healthy\"}\n```"), JudgeLabel::Control);
        assert_eq!(parse_label("It could be AD or Healthy."), JudgeLabel::Unparseable);
    }

    #[test]
    fn request_carries_no_label() {
        let cfg = JudgeConfig::for_model("m");
        let a = judge_request(&cfg, "the same text").unwrap();
        assert_eq!(a, judge_request(&cfg, "the same text").unwrap());
        let body = serde_json::to_string(&a).unwrap();
        assert!(!body.contains("\"case\"") && !body.contains("\"control\""));
    }

    struct Script(Vec<&'static str>, std::sync::atomic::AtomicUsize);

    impl ChatClient for Script {
        fn provider(&self) -> &str {
            "script"
        }

        async fn complete(&self, _req: ChatRequest) -> Result<ChatResponse, NetError> {
            let i = self.1.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Ok(ChatResponse { text: self.0[i.min(self.0.len() - 1)].into() })
        }
    }

    fn script(v: Vec<&'static str>) -> Script {
        Script(v, Default::default())
    }

    #[tokio::test]
    async fn attempts_are_counted() {
        let cfg = JudgeConfig::for_model("m");
        let v = judge(&script(vec!["{\"label\": \"AD\"}"]), &cfg, "a", "text").await.unwrap();
        assert_eq!((v.parsed_label, v.attempts), (JudgeLabel::Case, 1));
        let v = judge(&script(vec!["I think so.", "{\"label\": \"Healthy\"}"]), &cfg, "a", "text").await.unwrap();
        assert_eq!((v.parsed_label, v.attempts), (JudgeLabel::Control, 2));
        let v = judge(&script(vec!["no idea"]), &cfg, "a", "text").await.unwrap();
        assert_eq!((v.parsed_label, v.attempts), (JudgeLabel::Unparseable, 3));
    }

    #[test]
    fn unparseable_counts_as_wrong() {
        let items: Vec<JudgeItem> = [(Label::Case, JudgeLabel::Case), (Label::Control, JudgeLabel::Unparseable)]
            .iter()
            .enumerate()
            .map(|(i, (l, _))| JudgeItem { id: format!("t{i}"), label: *l, text: "x".into() })
            .collect();
        let verdicts: Vec<JudgeVerdict> = [JudgeLabel::Case, JudgeLabel::Unparseable]
            .iter()
            .enumerate()
            .map(|(i, p)| JudgeVerdict { id: format!("t{i}"), raw_response: String::new(), parsed_label: *p, attempts: 1, latency_ms: 0 })
            .collect();
        let r = judge_report(&items, &verdicts, "m", "d").unwrap();
        // tp = 1, fp = 1 (unparseable control scored as case)
        assert_eq!(r.per_seed[0].metrics["precision"], 0.5);
        assert_eq!(r.extra["unparseable_rate"], 0.5);
    }
}

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::client::{ChatClient, ChatMessage, ChatRequest};
use super::prompts::{build_cued_prompt, build_inference_prompt, label_name, GENERATION_REQUEST, PERSONA_COUNT};
use super::AugmentError;
use crate::corpus::{split_view, Corpus, Label, Split, Transcript};
use crate::lingfeat::tokenize::word_tokens;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub temperature: f64,
    #[serde(default)]
    pub top_p: Option<f64>,
    #[serde(default)]
    pub top_k: Option<u32>,
}

/// Adapter settings of an externally fine-tuned model, kept as metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinetuneRecord {
    pub qlora_rank: Option<u32>,
    pub qlora_alpha: Option<u32>,
    pub qlora_dropout: Option<f64>,
    pub effective_batch: u32,
    pub epochs: u32,
}

/// How the target label reaches the generator.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Conditioning {
    /// Fine-tuned endpoint; neutral prompt plus a `Label:` line in the system turn.
    #[default]
    SystemLabel,
    /// One fine-tuned endpoint per class; neutral prompt, label chosen by model name.
    AdapterPerClass { case_model: String, control_model: String },
    /// Endpoint that was not fine-tuned; role-varied prompt carrying the label's cue block.
    CuePrompted,
}

impl Conditioning {
    pub fn name(&self) -> &'static str {
        match self {
            Conditioning::SystemLabel => "system_label",
            Conditioning::AdapterPerClass { .. } => "adapter_per_class",
            Conditioning::CuePrompted => "cue_prompted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub provider: String,
    pub model: String,
    pub sampling: Sampling,
    #[serde(default)]
    pub finetune: Option<FinetuneRecord>,
    #[serde(default)]
    pub conditioning: Conditioning,
    #[serde(default)]
    pub max_tokens: Option<u32>,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        let s = self.sampling;
        if !(s.temperature > 0.0 && s.temperature <= 2.0) {
            return Err(AugmentError::Config(format!("{}: temperature must be in (0, 2], got {}", self.model, s.temperature)));
        }
        if let Some(p) = s.top_p {
            if !(p > 0.0 && p <= 1.0) {
                return Err(AugmentError::Config(format!("{}: top_p must be in (0, 1], got {p}", self.model)));
            }
        }
        if s.top_k == Some(0) {
            return Err(AugmentError::Config(format!("{}: top_k must be positive", self.model)));
        }
        Ok(())
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 5] = ["llama-3.1-8b", "medalpaca-7b", "ministral-8b", "llama-3.3-70b", "gpt-4o"];

/// Sampling and adapter settings registered for each generator family.
pub fn preset(name: &str) -> Option<GeneratorConfig> {
    let ft = |rank, alpha, dropout, batch, epochs| FinetuneRecord {
        qlora_rank: Some(rank),
        qlora_alpha: Some(alpha),
        qlora_dropout: Some(dropout),
        effective_batch: batch,
        epochs,
    };
    let nucleus = Sampling { temperature: 1.0, top_p: Some(0.95), top_k: Some(50) };
    let (sampling, finetune) = match name {
        "llama-3.1-8b" => (nucleus, ft(64, 128, 0.1, 8, 12)),
        "medalpaca-7b" => (nucleus, ft(128, 256, 0.1, 8, 6)),
        "ministral-8b" => (Sampling { top_p: None, ..nucleus }, ft(32, 64, 0.0, 8, 10)),
        "llama-3.3-70b" => (nucleus, ft(16, 32, 0.0, 8, 9)),
        "gpt-4o" => (
            Sampling { temperature: 1.0, top_p: None, top_k: None },
            FinetuneRecord { qlora_rank: None, qlora_alpha: None, qlora_dropout: None, effective_batch: 20, epochs: 10 },
        ),
        _ => return None,
    };
    Some(GeneratorConfig {
        provider: name.into(),
        model: name.into(),
        sampling,
        finetune: Some(finetune),
        conditioning: Conditioning::SystemLabel,
        max_tokens: Some(1024),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleBounds {
    pub min_words: usize,
    pub max_words: usize,
    /// Reject when 4-gram Jaccard similarity with an accepted sample exceeds this.
    pub near_duplicate: f64,
}

impl Default for SampleBounds {
    fn default() -> Self {
        Self { min_words: 10, max_words: 600, near_duplicate: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    Empty,
    TooShort { words: usize, min: usize },
    TooLong { words: usize, max: usize },
    Duplicate,
    NearDuplicate { jaccard: f64 },
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::Empty => write!(f, "empty"),
            Rejection::TooShort { words, min } => write!(f, "too_short ({words} < {min} words)"),
            Rejection::TooLong { words, max } => write!(f, "too_long ({words} > {max} words)"),
            Rejection::Duplicate => write!(f, "duplicate"),
            Rejection::NearDuplicate { jaccard } => write!(f, "near_duplicate (jaccard {jaccard:.3})"),
        }
    }
}

/// sha256 of the whitespace-normalised text.
pub fn content_hash(text: &str) -> String {
    let norm = text.split_whitespace().collect::<Vec<_>>().join(" ");
    hex::encode(Sha256::digest(norm.as_bytes()))
}

fn four_grams(text: &str) -> HashSet<Vec<String>> {
    word_tokens(text).windows(4).map(|w| w.to_vec()).collect()
}

fn jaccard(a: &HashSet<Vec<String>>, b: &HashSet<Vec<String>>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count() as f64;
    inter / ((a.len() + b.len()) as f64 - inter)
}

/// Accept/reject state over a growing set of accepted samples.
#[derive(Debug, Default)]
pub struct SampleValidator {
    pub bounds: SampleBounds,
    hashes: HashSet<String>,
    grams: Vec<HashSet<Vec<String>>>,
}

impl SampleValidator {
    pub fn new(bounds: SampleBounds) -> Self {
        Self { bounds, ..Self::default() }
    }

    /// Checks `text` against the bounds and the accepted set without
    /// recording it.
    pub fn check(&self, text: &str) -> Result<String, Rejection> {
        let words = word_tokens(text).len();
        if text.trim().is_empty() || words == 0 {
            return Err(Rejection::Empty);
        }
        if words < self.bounds.min_words {
            return Err(Rejection::TooShort { words, min: self.bounds.min_words });
        }
        if words > self.bounds.max_words {
            return Err(Rejection::TooLong { words, max: self.bounds.max_words });
        }
        let hash = content_hash(text);
        if self.hashes.contains(&hash) {
            return Err(Rejection::Duplicate);
        }
        let g = four_grams(text);
        if !g.is_empty() {
            let worst = self.grams.iter().map(|o| jaccard(&g, o)).fold(0.0, f64::max);
            if worst > self.bounds.near_duplicate {
                return Err(Rejection::NearDuplicate { jaccard: worst });
            }
        }
        Ok(hash)
    }

    /// Checks and, on success, records the sample as accepted.
    pub fn admit(&mut self, text: &str) -> Result<String, Rejection> {
        let hash = self.check(text)?;
        self.hashes.insert(hash.clone());
        self.grams.push(four_grams(text));
        Ok(hash)
    }
}

/// One-shot check against an explicit accepted set.
pub fn validate_sample(text: &str, bounds: SampleBounds, accepted: &[&str]) -> Result<(), Rejection> {
    let mut v = SampleValidator::new(bounds);
    for a in accepted {
        let _ = v.admit(a);
    }
    v.check(text).map(|_| ())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleProvenance {
    pub provider: String,
    pub model: String,
    pub sampling: Sampling,
    pub conditioning: String,
    /// "neutral" or "cued".
    pub prompt: String,
    pub prompt_hash: String,
    pub slot: usize,
    pub attempt: u32,
    pub request_seed: u64,
    /// Unix seconds; 0 in deterministic runs.
    pub generated_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SampleStatus {
    Accepted,
    Rejected { why: Rejection },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSample {
    pub id: String,
    pub text: String,
    pub label: Label,
    pub role_index: Option<usize>,
    pub content_hash: String,
    #[serde(flatten)]
    pub status: SampleStatus,
    pub provenance: SampleProvenance,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    /// Accepted samples in slot order.
    pub samples: Vec<SyntheticSample>,
    /// Rejected attempts, kept for audit.
    pub rejected: Vec<SyntheticSample>,
    pub generators: Vec<GeneratorConfig>,
}

impl SyntheticCorpus {
    pub fn label_counts(&self) -> BTreeMap<Label, usize> {
        let mut m = BTreeMap::new();
        for s in &self.samples {
            *m.entry(s.label).or_insert(0) += 1;
        }
        m
    }

    /// Accepted samples as JSONL `{text, label, provenance, ...}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for s in &self.samples {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, AugmentError> {
        let mut c = SyntheticCorpus::default();
        let mut seen = HashSet::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| AugmentError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let s: SyntheticSample = serde_json::from_str(&line).map_err(|e| AugmentError::Format(format!("line {}: {e}", i + 1)))?;
            if s.status != SampleStatus::Accepted {
                continue;
            }
            if !seen.insert(s.content_hash.clone()) {
                return Err(AugmentError::Format(format!("line {}: duplicate content hash", i + 1)));
            }
            c.samples.push(s);
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, AugmentError> {
        let f = std::fs::File::open(path).map_err(|e| AugmentError::Io(format!("{}: {e}", path.display())))?;
        Self::read_jsonl(std::io::BufReader::new(f))
    }

    /// Appends another corpus, dropping samples whose hash is already present.
    pub fn extend(&mut self, other: SyntheticCorpus) {
        let mut seen: HashSet<String> = self.samples.iter().map(|s| s.content_hash.clone()).collect();
        self.samples.extend(other.samples.into_iter().filter(|s| seen.insert(s.content_hash.clone())));
        self.rejected.extend(other.rejected);
        for g in other.generators {
            if !self.generators.contains(&g) {
                self.generators.push(g);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationOptions {
    pub bounds: SampleBounds,
    /// Attempts per slot before giving up.
    pub attempts_per_slot: u32,
    /// Base of the per-request seed sent to the provider.
    pub seed: u64,
    /// Record 0 instead of the wall clock.
    pub deterministic_time: bool,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self { bounds: SampleBounds::default(), attempts_per_slot: 4, seed: 0, deterministic_time: false }
    }
}

/// Label of every slot. Case slots are spread evenly (Bresenham) so that any
/// prefix of the plan keeps the requested ratio within rounding.
pub fn label_plan(n: usize, case_fraction: f64) -> Vec<Label> {
    let n_case = (n as f64 * case_fraction.clamp(0.0, 1.0)).round() as usize;
    (0..n).map(|i| if (i + 1) * n_case / n > i * n_case / n { Label::Case } else { Label::Control }).collect()
}

struct Planned {
    slot: usize,
    attempt: u32,
    label: Label,
    role_index: Option<usize>,
    request: ChatRequest,
    prompt_kind: &'static str,
}

fn plan_request(cfg: &GeneratorConfig, slot: usize, attempt: u32, label: Label, seed: u64) -> Result<Planned, AugmentError> {
    let (system, model, role_index, prompt_kind) = match &cfg.conditioning {
        Conditioning::SystemLabel => {
            (format!("{}\n\nLabel: {}", build_inference_prompt(), label_name(label)), cfg.model.clone(), None, "neutral")
        }
        Conditioning::AdapterPerClass { case_model, control_model } => {
            let m = if label == Label::Case { case_model } else { control_model };
            (build_inference_prompt(), m.clone(), None, "neutral")
        }
        Conditioning::CuePrompted => {
            let role = (slot + attempt as usize) % PERSONA_COUNT;
            (build_cued_prompt(label, role)?, cfg.model.clone(), Some(role), "cued")
        }
    };
    let request_seed = seed.wrapping_add((slot as u64) << 16).wrapping_add(attempt as u64);
    Ok(Planned {
        slot,
        attempt,
        label,
        role_index,
        prompt_kind,
        request: ChatRequest {
            model,
            messages: vec![ChatMessage::system(system), ChatMessage::user(GENERATION_REQUEST)],
            temperature: cfg.sampling.temperature,
            top_p: cfg.sampling.top_p,
            top_k: cfg.sampling.top_k,
            max_tokens: cfg.max_tokens,
            seed: Some(request_seed),
        },
    })
}

fn now_unix() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Drives `client` until `n` samples are accepted.
///
/// Requests for all open slots of a round are issued concurrently (the
/// client enforces rate and in-flight limits); responses are validated in
/// slot order, so the result does not depend on completion order. A rejected
/// slot is retried in the next round until its attempt budget runs out.
pub async fn generate_synthetic<C: ChatClient>(
    client: Arc<C>,
    cfg: &GeneratorConfig,
    n: usize,
    case_fraction: f64,
    opts: &GenerationOptions,
) -> Result<SyntheticCorpus, AugmentError> {
    if n == 0 {
        return Err(AugmentError::Config("n must be at least 1".into()));
    }
    cfg.validate()?;
    let plan = label_plan(n, case_fraction);
    let mut validator = SampleValidator::new(opts.bounds);
    let mut accepted: Vec<Option<SyntheticSample>> = vec![None; n];
    let mut rejected = Vec::new();
    let mut open: Vec<usize> = (0..n).collect();
    let mut attempt = 1u32;
    while !open.is_empty() {
        if attempt > opts.attempts_per_slot.max(1) {
            let reasons: Vec<String> = rejected
                .iter()
                .filter(|s: &&SyntheticSample| s.provenance.slot == open[0])
                .filter_map(|s| match &s.status {
                    SampleStatus::Rejected { why } => Some(why.to_string()),
                    SampleStatus::Accepted => None,
                })
                .collect();
            return Err(AugmentError::RetryBudget { slot: open[0], open: open.len(), reasons });
        }
        let mut set = tokio::task::JoinSet::new();
        for &slot in &open {
            let p = plan_request(cfg, slot, attempt, plan[slot], opts.seed)?;
            let c = Arc::clone(&client);
            set.spawn(async move {
                let r = c.complete(p.request.clone()).await;
                (p, r)
            });
        }
        let mut results = Vec::with_capacity(open.len());
        while let Some(j) = set.join_next().await {
            results.push(j.map_err(|e| AugmentError::Provider(e.to_string()))?);
        }
        results.sort_by_key(|(p, _)| p.slot);
        let mut still_open = Vec::new();
        for (p, r) in results {
            let text = r.map_err(|e| AugmentError::Provider(e.to_string()))?.text.trim().to_string();
            let prompt_hash = hex::encode(Sha256::digest(serde_json::to_vec(&p.request.messages).unwrap_or_default()));
            let provenance = SampleProvenance {
                provider: client.provider().to_string(),
                model: p.request.model.clone(),
                sampling: cfg.sampling,
                conditioning: cfg.conditioning.name().into(),
                prompt: p.prompt_kind.into(),
                prompt_hash,
                slot: p.slot,
                attempt: p.attempt,
                request_seed: p.request.seed.unwrap_or(0),
                generated_at: if opts.deterministic_time { 0 } else { now_unix() },
            };
            let hash = content_hash(&text);
            let mut sample = SyntheticSample {
                id: format!("syn-{}", &hash[..16]),
                text,
                label: p.label,
                role_index: p.role_index,
                content_hash: hash,
                status: SampleStatus::Accepted,
                provenance,
            };
            match validator.admit(&sample.text) {
                Ok(_) => accepted[p.slot] = Some(sample),
                Err(why) => {
                    tracing::info!(slot = p.slot, attempt = p.attempt, reason = %why, "sample rejected");
                    sample.status = SampleStatus::Rejected { why };
                    rejected.push(sample);
                    still_open.push(p.slot);
                }
            }
        }
        open = still_open;
        attempt += 1;
    }
    Ok(SyntheticCorpus {
        samples: accepted.into_iter().map(|s| s.expect("every slot filled")).collect(),
        rejected,
        generators: vec![cfg.clone()],
    })
}

/// Real corpus plus `multiplier * |train|` synthetic samples (in corpus
/// order) added to the train split. Validation and test are untouched.
pub fn augment_training_set(real: &Corpus, synth: &SyntheticCorpus, multiplier: usize) -> Result<Corpus, AugmentError> {
    if !(1..=5).contains(&multiplier) {
        return Err(AugmentError::Config(format!("multiplier must be in 1..=5, got {multiplier}")));
    }
    let n_train = split_view(real, Split::Train).len();
    if n_train == 0 {
        return Err(AugmentError::Config("real corpus has no train split".into()));
    }
    let need = multiplier * n_train;
    if synth.samples.len() < need {
        return Err(AugmentError::Insufficient { need, have: synth.samples.len() });
    }
    let mut all = real.transcripts.clone();
    for s in &synth.samples[..need] {
        let mut t = Transcript::new(s.id.clone(), s.label, Split::Train, s.text.clone());
        t.metadata.insert("source".into(), "synthetic".into());
        t.metadata.insert("generator".into(), s.provenance.model.clone());
        all.push(t);
    }
    Corpus::new(all).map_err(|e| AugmentError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::augment::client::ChatResponse;
    use crate::net::NetError;

    type Reply = dyn Fn(usize, u32) -> String + Send + Sync;

    /// Replies as a function of (slot, attempt), decoded from the request seed.
    struct Canned {
        reply: Box<Reply>,
        seen: std::sync::Mutex<Vec<ChatRequest>>,
    }

    impl Canned {
        fn new(reply: impl Fn(usize, u32) -> String + Send + Sync + 'static) -> Arc<Self> {
            Arc::new(Self { reply: Box::new(reply), seen: Default::default() })
        }
    }

    impl ChatClient for Canned {
        fn provider(&self) -> &str {
            "canned"
        }

        async fn complete(&self, req: ChatRequest) -> Result<ChatResponse, NetError> {
            let seed = req.seed.unwrap();
            self.seen.lock().unwrap().push(req);
            Ok(ChatResponse { text: (self.reply)((seed >> 16) as usize, (seed & 0xffff) as u32) })
        }
    }

    fn long(i: usize) -> String {
        format!("sample {i} the boy climbs on the stool and the jar tips while mother dries plate number {i} at the sink")
    }

    fn opts() -> GenerationOptions {
        GenerationOptions { deterministic_time: true, ..GenerationOptions::default() }
    }

    #[tokio::test]
    async fn balanced_four_samples() {
        let c = Canned::new(|slot, _| long(slot));
        let cfg = preset("llama-3.1-8b").unwrap();
        let corpus = generate_synthetic(c.clone(), &cfg, 4, 0.5, &opts()).await.unwrap();
        assert_eq!(corpus.samples.len(), 4);
        assert_eq!(corpus.label_counts()[&Label::Case], 2);
        assert_eq!(corpus.label_counts()[&Label::Control], 2);
        for req in c.seen.lock().unwrap().iter() {
            assert_eq!(req.top_p, Some(0.95));
            assert_eq!(req.top_k, Some(50));
            assert_eq!(req.temperature, 1.0);
        }
    }

    #[tokio::test]
    async fn short_and_duplicate_samples_are_retried() {
        // slot 0: too short, then a copy of slot 1, then a fresh text
        let c = Canned::new(|slot, attempt| match (slot, attempt) {
            (0, 1) => "too short".into(),
            (0, 2) | (1, _) => long(1),
            _ => long(2),
        });
        let corpus = generate_synthetic(c, &preset("ministral-8b").unwrap(), 2, 0.5, &opts()).await.unwrap();
        assert_eq!(corpus.samples.len(), 2);
        let reasons: Vec<_> = corpus.rejected.iter().map(|s| s.status.clone()).collect();
        assert!(matches!(&reasons[0], SampleStatus::Rejected { why: Rejection::TooShort { words: 2, min: 10 } }));
        assert!(matches!(&reasons[1], SampleStatus::Rejected { why: Rejection::Duplicate }));
        let hashes: HashSet<_> = corpus.samples.iter().map(|s| &s.content_hash).collect();
        assert_eq!(hashes.len(), 2);
    }

    #[tokio::test]
    async fn budget_exhaustion_errors() {
        let c = Canned::new(|_, _| "short".into());
        let r = generate_synthetic(c, &preset("gpt-4o").unwrap(), 1, 1.0, &opts()).await;
        assert!(matches!(r, Err(AugmentError::RetryBudget { .. })));
    }

    #[tokio::test]
    async fn neutral_prompts_carry_no_cues() {
        let c = Canned::new(|slot, _| long(slot));
        let mut cfg = preset("medalpaca-7b").unwrap();
        cfg.conditioning = Conditioning::AdapterPerClass { case_model: "m-case".into(), control_model: "m-control".into() };
        generate_synthetic(c.clone(), &cfg, 6, 0.5, &opts()).await.unwrap();
        for req in c.seen.lock().unwrap().iter() {
            assert!(req.messages.iter().all(|m| crate::augment::cue_hits(&m.content).is_empty()));
            assert!(req.model == "m-case" || req.model == "m-control");
        }
    }

    #[test]
    fn validation_rules() {
        let b = SampleBounds::default();
        assert_eq!(validate_sample("one two three", b, &[]), Err(Rejection::TooShort { words: 3, min: 10 }));
        assert_eq!(validate_sample("   ", b, &[]), Err(Rejection::Empty));
        let t = long(3);
        assert_eq!(validate_sample(&t, b, &[&t]), Err(Rejection::Duplicate));
        let near = format!("{t} again");
        assert!(matches!(validate_sample(&near, b, &[&t]), Err(Rejection::NearDuplicate { .. })));
        assert!(validate_sample(&long(4), b, &[&t]).is_ok());
        assert!(b.min_words <= 21 && b.max_words >= 523);
    }

    #[test]
    fn jaccard_is_intersection_over_union() {
        let a: HashSet<Vec<String>> = [vec!["a".to_string()], vec!["b".to_string()]].into_iter().collect();
        let b: HashSet<Vec<String>> = [vec!["b".to_string()], vec!["c".to_string()]].into_iter().collect();
        assert!((jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn plan_prefixes_stay_balanced() {
        let p = label_plan(10, 0.5);
        assert_eq!(p.iter().filter(|l| **l == Label::Case).count(), 5);
        for k in 1..=10 {
            let c = p[..k].iter().filter(|l| **l == Label::Case).count() as f64;
            assert!((c - k as f64 * 0.5).abs() <= 1.0);
        }
        assert_eq!(label_plan(7, 0.3).iter().filter(|l| **l == Label::Case).count(), 2);
    }

    #[test]
    fn presets_follow_registry() {
        let m = preset("ministral-8b").unwrap();
        assert_eq!((m.sampling.top_p, m.sampling.top_k), (None, Some(50)));
        let g = preset("gpt-4o").unwrap();
        assert_eq!((g.sampling.top_p, g.sampling.top_k, g.sampling.temperature), (None, None, 1.0));
        let ft = preset("medalpaca-7b").unwrap().finetune.unwrap();
        assert_eq!((ft.qlora_rank, ft.qlora_alpha, ft.epochs), (Some(128), Some(256), 6));
        assert!(PRESET_NAMES.iter().all(|n| preset(n).unwrap().validate().is_ok()));
        assert!(preset("nope").is_none());
    }
}

//! Pipeline configuration: one TOML document, `${VAR}` interpolation from
//! the environment, unknown keys rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cogscreen_core::augment::{preset, Conditioning, GeneratorConfig, ProviderConfig, Sampling};
use cogscreen_core::embeddings::RemoteConfig;
use cogscreen_core::neuralnet::{HeadConfig, ModelKind, TrainConfig};
use cogscreen_core::textsim::ReferencePolicy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub embedding: EmbeddingSource,
    #[serde(default)]
    pub train: BTreeMap<ModelKind, TrainOverrides>,
    #[serde(default)]
    pub providers: Vec<ProviderConfig>,
    #[serde(default)]
    pub augment: AugmentPlan,
    #[serde(default)]
    pub judge: Option<JudgeSection>,
    #[serde(default)]
    pub quality: QualitySection,
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub manifest: PathBuf,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub tagger: Option<PathBuf>,
    /// Embedding store (JSONL). Defaults to `<out>/embeddings.jsonl`.
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "source", rename_all = "lowercase")]
pub enum EmbeddingSource {
    /// Offline bag-of-words pseudo-embeddings.
    Pseudo {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// Vectors from the embedding store, filled by `embed-fetch`.
    Store {
        provider: String,
        #[serde(default)]
        remote: Option<RemoteConfig>,
    },
}

fn default_dim() -> usize {
    384
}

impl Default for EmbeddingSource {
    fn default() -> Self {
        EmbeddingSource::Pseudo { dim: default_dim() }
    }
}

/// Partial override of the per-kind training defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    pub emb_hidden: Option<usize>,
    pub emb_dropout: Option<f64>,
    pub ling_hidden: Option<usize>,
    pub ling_dropout: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    /// Short name used in file names and figures.
    pub name: String,
    /// Provider id from `[[providers]]`.
    pub provider: String,
    /// Start from a named preset; fields below override it.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub sampling: Option<Sampling>,
    #[serde(default)]
    pub conditioning: Option<Conditioning>,
    #[serde(default)]
    pub max_tokens: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentPlan {
    pub generators: Vec<GeneratorEntry>,
    pub multipliers: Vec<usize>,
    /// Share of Case samples; defaults to the train split's share.
    pub case_fraction: Option<f64>,
    /// Model retrained by `augment-sweep`.
    pub model: ModelKind,
    pub attempts_per_slot: u32,
    pub min_words: usize,
    pub max_words: usize,
    pub near_duplicate: f64,
}

impl Default for AugmentPlan {
    fn default() -> Self {
        Self {
            generators: Vec::new(),
            multipliers: vec![1, 2, 3, 4, 5],
            case_fraction: None,
            model: ModelKind::Fusion,
            attempts_per_slot: 4,
            min_words: 10,
            max_words: 600,
            near_duplicate: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeSection {
    pub provider: String,
    pub model: String,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub max_retries: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QualitySection {
    pub reference_policy: ReferencePolicy,
    pub max_n: usize,
    pub perplexity: f64,
    pub tsne_iterations: usize,
    pub neighbours: usize,
}

impl Default for QualitySection {
    fn default() -> Self {
        Self { reference_policy: ReferencePolicy::default(), max_n: 4, perplexity: 30.0, tsne_iterations: 1000, neighbours: 10 }
    }
}

/// Replaces every `${NAME}` with the variable's value, escaped for a TOML
/// basic string. A missing variable is an error naming its line.
pub fn interpolate(text: &str, lookup: impl Fn(&str) -> Option<String>) -> Result<String, CliError> {
    let re = Regex::new(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("static regex");
    let mut out = String::with_capacity(text.len());
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let mut last = 0;
        for cap in re.captures_iter(line) {
            let m = cap.get(0).expect("match");
            let name = &cap[1];
            let value =
                lookup(name).ok_or_else(|| CliError::Config(format!("line {}: environment variable {name} is not set", lineno + 1)))?;
            out.push_str(&line[last..m.start()]);
            out.push_str(&value.replace('\\', "\\\\").replace('"', "\\\""));
            last = m.end();
        }
        out.push_str(&line[last..]);
    }
    Ok(out)
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let text = interpolate(text, |k| std::env::var(k).ok())?;
        let cfg: PipelineConfig = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path`; relative paths inside are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.paths.manifest);
        fix(&mut cfg.paths.out);
        for p in [&mut cfg.paths.lexicon, &mut cfg.paths.tagger, &mut cfg.paths.embeddings].into_iter().flatten() {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        for kind in ModelKind::ALL {
            self.train_config(kind).validate().map_err(|e| CliError::Config(format!("train.{}: {e}", kind.as_str())))?;
        }
        let mut ids = std::collections::HashSet::new();
        for p in &self.providers {
            if !ids.insert(p.id.as_str()) {
                return bad(format!("providers: duplicate id {:?}", p.id));
            }
        }
        let mut names = std::collections::HashSet::new();
        for g in &self.augment.generators {
            if !names.insert(g.name.as_str()) {
                return bad(format!("augment.generators: duplicate name {:?}", g.name));
            }
            if !ids.contains(g.provider.as_str()) {
                return bad(format!("augment.generators.{}: unknown provider {:?}", g.name, g.provider));
            }
            self.generator(&g.name)?;
        }
        if self.augment.multipliers.iter().any(|m| !(1..=5).contains(m)) {
            return bad("augment.multipliers must lie in 1..=5".into());
        }
        if let Some(f) = self.augment.case_fraction {
            if !(0.0..=1.0).contains(&f) {
                return bad("augment.case_fraction must lie in [0, 1]".into());
            }
        }
        if let Some(j) = &self.judge {
            if !ids.contains(j.provider.as_str()) {
                return bad(format!("judge: unknown provider {:?}", j.provider));
            }
        }
        if !(1..=4).contains(&self.quality.max_n) {
            return bad("quality.max_n must lie in 1..=4".into());
        }
        Ok(())
    }

    pub fn train_config(&self, kind: ModelKind) -> TrainConfig {
        let mut cfg = TrainConfig::for_kind(kind);
        cfg.seeds = self.seeds.clone();
        if let Some(o) = self.train.get(&kind) {
            cfg.epochs = o.epochs.unwrap_or(cfg.epochs);
            cfg.batch_size = o.batch_size.unwrap_or(cfg.batch_size);
            cfg.lr = o.lr.unwrap_or(cfg.lr);
            cfg.weight_decay = o.weight_decay.unwrap_or(cfg.weight_decay);
            cfg.emb_head =
                HeadConfig { hidden: o.emb_hidden.unwrap_or(cfg.emb_head.hidden), dropout: o.emb_dropout.unwrap_or(cfg.emb_head.dropout) };
            cfg.ling_head = HeadConfig {
                hidden: o.ling_hidden.unwrap_or(cfg.ling_head.hidden),
                dropout: o.ling_dropout.unwrap_or(cfg.ling_head.dropout),
            };
        }
        cfg
    }

    pub fn provider(&self, id: &str) -> Result<&ProviderConfig, CliError> {
        self.providers.iter().find(|p| p.id == id).ok_or_else(|| CliError::Config(format!("no provider with id {id:?}")))
    }

    /// Resolved generator settings for the entry called `name`.
    pub fn generator(&self, name: &str) -> Result<GeneratorConfig, CliError> {
        let entry = self
            .augment
            .generators
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| CliError::Config(format!("no generator named {name:?} in augment.generators")))?;
        let bad = |m: String| CliError::Config(format!("augment.generators.{name}: {m}"));
        let mut cfg = match &entry.preset {
            Some(p) => preset(p).ok_or_else(|| bad(format!("unknown preset {p:?}")))?,
            None => GeneratorConfig {
                provider: entry.provider.clone(),
                model: entry.model.clone().ok_or_else(|| bad("model is required without a preset".into()))?,
                sampling: entry.sampling.clone().ok_or_else(|| bad("sampling is required without a preset".into()))?,
                finetune: None,
                conditioning: Conditioning::default(),
                max_tokens: None,
            },
        };
        cfg.provider = entry.provider.clone();
        if let Some(m) = &entry.model {
            cfg.model = m.clone();
        }
        if let Some(s) = &entry.sampling {
            cfg.sampling = s.clone();
        }
        if let Some(c) = &entry.conditioning {
            cfg.conditioning = c.clone();
        }
        if entry.max_tokens.is_some() {
            cfg.max_tokens = entry.max_tokens;
        }
        cfg.validate().map_err(|e| bad(e.to_string()))?;
        Ok(cfg)
    }

    pub fn embeddings_path(&self) -> PathBuf {
        self.paths.embeddings.clone().unwrap_or_else(|| self.paths.out.join("embeddings.jsonl"))
    }

    /// sha256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[paths]\nmanifest = \"m.csv\"\n";

    #[test]
    fn defaults_mirror_training_protocol() {
        let cfg = PipelineConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.seeds, vec![0, 1, 2, 3, 4]);
        let f = cfg.train_config(ModelKind::Fusion);
        assert_eq!((f.epochs, f.batch_size, f.lr, f.weight_decay), (50, 8, 2e-5, 2e-3));
        let l = cfg.train_config(ModelKind::Linguistic);
        assert_eq!((l.lr, l.ling_head.hidden), (8e-3, 64));
        assert_eq!(cfg.augment.multipliers, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn unknown_key_reports_location() {
        let err = PipelineConfig::parse("[paths]\nmanifest = \"m.csv\"\nmanfest = \"x\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("manfest") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn interpolation() {
        let env = |k: &str| (k == "HOST").then(|| "a\"b".to_string());
        assert_eq!(interpolate("url = \"${HOST}/v1\"\n", env).unwrap(), "url = \"a\\\"b/v1\"\n");
        let err = interpolate("x = 1\ny = \"${NOPE}\"\n", env).unwrap_err();
        assert!(err.to_string().contains("line 2") && err.to_string().contains("NOPE"));
    }

    #[test]
    fn overrides_and_generators() {
        let text = r#"
seeds = [7]
[paths]
manifest = "m.csv"
[train.fusion]
epochs = 3
[[providers]]
id = "local"
url = "http://127.0.0.1:9/v1/chat/completions"
[[augment.generators]]
name = "medalpaca"
provider = "local"
preset = "medalpaca-7b"
model = "medalpaca-ft"
"#;
        let cfg = PipelineConfig::parse(text).unwrap();
        assert_eq!(cfg.train_config(ModelKind::Fusion).epochs, 3);
        assert_eq!(cfg.train_config(ModelKind::Fusion).seeds, vec![7]);
        let g = cfg.generator("medalpaca").unwrap();
        assert_eq!((g.model.as_str(), g.provider.as_str(), g.sampling.top_k), ("medalpaca-ft", "local", Some(50)));
        let bad = text.replace("provider = \"local\"\npreset", "provider = \"other\"\npreset");
        assert!(PipelineConfig::parse(&bad).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = PipelineConfig::parse(MINIMAL).unwrap();
        let b = PipelineConfig::parse(&format!("seeds = [1]\n{MINIMAL}")).unwrap();
        assert_eq!(a.hash(), PipelineConfig::parse(MINIMAL).unwrap().hash());
        assert_ne!(a.hash(), b.hash());
    }
}

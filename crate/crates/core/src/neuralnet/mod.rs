//! Small from-scratch networks: MLP heads, late fusion, AdamW, the multi-seed
//! training protocol and portable checkpoints.

mod adamw;
mod checkpoint;
mod fusion;
mod mlp;
mod train;

pub use adamw::{AdamW, AdamWHyper};
pub use checkpoint::{predict_proba, Checkpoint, HeadShape, Predictor, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use fusion::{sigmoid, FusionCache, FusionParams};
pub use mlp::{cross_entropy, dlogits, p_case, softmax, MlpCache, MlpParams, CASE, CLASSES, CONTROL};
pub use train::{evaluate, train, EpochLog, SeedFailure, SplitData, TrainData, TrainOutcome};

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("{0}")]
    Config(String),
    #[error("seed {seed}: non-finite loss at epoch {epoch}, batch {batch} ({detail})")]
    NonFiniteLoss { seed: u64, epoch: usize, batch: usize, detail: String },
    #[error("every seed failed: {0}")]
    AllSeedsFailed(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Metrics(#[from] crate::clsmetrics::MetricsError),
}

pub fn class_index(label: Label) -> usize {
    match label {
        Label::Case => CASE,
        Label::Control => CONTROL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Embedding,
    Linguistic,
    Fusion,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Embedding, ModelKind::Linguistic, ModelKind::Fusion];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Embedding => "embedding",
            ModelKind::Linguistic => "linguistic",
            ModelKind::Fusion => "fusion",
        }
    }

    pub fn uses_embeddings(self) -> bool {
        self != ModelKind::Linguistic
    }

    pub fn uses_features(self) -> bool {
        self != ModelKind::Embedding
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "embedding" => Ok(ModelKind::Embedding),
            "linguistic" => Ok(ModelKind::Linguistic),
            "fusion" => Ok(ModelKind::Fusion),
            _ => Err(format!("unknown model kind {s:?} (expected embedding, linguistic or fusion)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadConfig {
    pub hidden: usize,
    pub dropout: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub seeds: Vec<u64>,
    /// Embedding head (embedding model, fusion embedding branch).
    pub emb_head: HeadConfig,
    /// Linguistic head (linguistic model, fusion linguistic branch).
    pub ling_head: HeadConfig,
}

impl TrainConfig {
    /// Defaults per model kind: 50 epochs, batch 8, seeds 0..=4.
    /// Embedding: 256 hidden, dropout 0.4, lr 2e-5, wd 2e-3.
    /// Linguistic: 64 hidden, no dropout, lr 8e-3, wd 1e-3.
    /// Fusion: embedding branch 256/0.4, linguistic branch 128/0, lr 2e-5,
    /// wd 2e-3.
    pub fn for_kind(kind: ModelKind) -> Self {
        let emb_head = HeadConfig { hidden: 256, dropout: 0.4 };
        let base = Self {
            epochs: 50,
            batch_size: 8,
            lr: 2e-5,
            weight_decay: 2e-3,
            seeds: vec![0, 1, 2, 3, 4],
            emb_head,
            ling_head: HeadConfig { hidden: 128, dropout: 0.0 },
        };
        match kind {
            ModelKind::Embedding | ModelKind::Fusion => base,
            ModelKind::Linguistic => Self { lr: 8e-3, weight_decay: 1e-3, ling_head: HeadConfig { hidden: 64, dropout: 0.0 }, ..base },
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |m: &str| Err(NetError::Config(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if self.seeds.is_empty() {
            return bad("seed list is empty");
        }
        for h in [self.emb_head, self.ling_head] {
            if h.hidden == 0 || !(0.0..1.0).contains(&h.dropout) {
                return bad("hidden must be >= 1 and dropout in [0, 1)");
            }
        }
        if !(self.lr >= 0.0 && self.weight_decay >= 0.0) {
            return bad("lr and weight_decay must be non-negative");
        }
        Ok(())
    }
}

/// Inputs for one example; which parts are required depends on the model.
#[derive(Debug, Clone, Copy)]
pub struct ModelInput<'a> {
    pub emb: Option<&'a [f64]>,
    pub ling: Option<&'a [f64]>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Embedding(MlpParams),
    Linguistic(MlpParams),
    Fusion(FusionParams),
}

pub enum ModelCache {
    Mlp(MlpCache),
    Fusion(FusionCache),
}

impl ModelCache {
    pub fn logits(&self) -> [f64; CLASSES] {
        match self {
            ModelCache::Mlp(c) => c.logits,
            ModelCache::Fusion(c) => c.logits,
        }
    }
}

fn need<'a>(x: Option<&'a [f64]>, what: &str) -> Result<&'a [f64], NetError> {
    x.ok_or_else(|| NetError::Shape(format!("missing {what} input")))
}

impl Model {
    pub fn init<R: Rng>(kind: ModelKind, cfg: &TrainConfig, emb_dim: usize, ling_dim: usize, rng: &mut R) -> Self {
        match kind {
            ModelKind::Embedding => Model::Embedding(MlpParams::init(emb_dim, cfg.emb_head.hidden, cfg.emb_head.dropout, rng)),
            ModelKind::Linguistic => Model::Linguistic(MlpParams::init(ling_dim, cfg.ling_head.hidden, cfg.ling_head.dropout, rng)),
            ModelKind::Fusion => Model::Fusion(FusionParams::init(
                emb_dim,
                cfg.emb_head.hidden,
                cfg.emb_head.dropout,
                ling_dim,
                cfg.ling_head.hidden,
                cfg.ling_head.dropout,
                rng,
            )),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Embedding(_) => ModelKind::Embedding,
            Model::Linguistic(_) => ModelKind::Linguistic,
            Model::Fusion(_) => ModelKind::Fusion,
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        match self {
            Model::Embedding(p) | Model::Linguistic(p) => p.flat.clone(),
            Model::Fusion(f) => f.to_flat(),
        }
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        match self {
            Model::Embedding(p) | Model::Linguistic(p) => p.flat.copy_from_slice(flat),
            Model::Fusion(f) => f.set_flat(flat),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Model::Embedding(p) | Model::Linguistic(p) => p.flat.len(),
            Model::Fusion(f) => f.param_count(),
        }
    }

    /// Forward pass; `rng` present means train mode.
    pub fn forward<R: Rng>(&self, x: ModelInput<'_>, rng: Option<&mut R>) -> Result<ModelCache, NetError> {
        Ok(match self {
            Model::Embedding(p) => ModelCache::Mlp(p.forward(need(x.emb, "embedding")?, rng)?),
            Model::Linguistic(p) => ModelCache::Mlp(p.forward(need(x.ling, "feature")?, rng)?),
            Model::Fusion(f) => ModelCache::Fusion(f.forward(need(x.emb, "embedding")?, need(x.ling, "feature")?, rng)?),
        })
    }

    /// Eval-mode logits.
    pub fn logits(&self, x: ModelInput<'_>) -> Result<[f64; CLASSES], NetError> {
        Ok(self.forward::<rand_chacha::ChaCha8Rng>(x, None)?.logits())
    }

    pub fn accumulate_grad(&self, cache: &ModelCache, dlogits: [f64; CLASSES], grad: &mut [f64]) {
        match (self, cache) {
            (Model::Embedding(p) | Model::Linguistic(p), ModelCache::Mlp(c)) => p.accumulate_grad(c, dlogits, grad),
            (Model::Fusion(f), ModelCache::Fusion(c)) => f.accumulate_grad(c, dlogits, grad),
            _ => panic!("cache does not belong to this model"),
        }
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use base64::Engine;
use serde::{Deserialize, Serialize};

use super::fusion::FusionParams;
use super::mlp::{p_case, MlpParams};
use super::{Model, ModelInput, ModelKind, NetError, TrainConfig};
use crate::lingfeat::Standardizer;

pub const CHECKPOINT_FORMAT: &str = "cogscreen-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadShape {
    pub name: String,
    pub input_dim: usize,
    pub hidden: usize,
    pub dropout: f64,
}

/// Trained parameters plus everything needed to reuse them. Parameters are
/// stored as f32; evaluation always goes through the stored values so a
/// reloaded checkpoint predicts exactly like the original.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub model_kind: ModelKind,
    pub heads: Vec<HeadShape>,
    pub config: TrainConfig,
    pub seed: u64,
    pub best_epoch: usize,
    pub val_f1: f64,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    pub standardizer: Option<Standardizer>,
    pub emb_provider: Option<String>,
    pub param_count: usize,
    /// Base64 of little-endian f32 parameters in model flat order.
    pub payload: String,
}

fn encode(params: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(params.len() * 4);
    for p in params {
        bytes.extend_from_slice(&(*p as f32).to_le_bytes());
    }
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn head(name: &str, p: &MlpParams) -> HeadShape {
    HeadShape { name: name.into(), input_dim: p.input_dim, hidden: p.hidden, dropout: p.dropout }
}

impl Checkpoint {
    pub fn from_model(
        model: &Model,
        config: &TrainConfig,
        seed: u64,
        best_epoch: usize,
        val_f1: f64,
        standardizer: Option<Standardizer>,
        emb_provider: Option<&str>,
    ) -> Self {
        let heads = match model {
            Model::Embedding(p) => vec![head("embedding", p)],
            Model::Linguistic(p) => vec![head("linguistic", p)],
            Model::Fusion(f) => vec![head("embedding", &f.emb), head("linguistic", &f.ling)],
        };
        let flat = model.to_flat();
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            model_kind: model.kind(),
            heads,
            config: config.clone(),
            seed,
            best_epoch,
            val_f1,
            metrics: BTreeMap::new(),
            standardizer,
            emb_provider: emb_provider.map(String::from),
            param_count: flat.len(),
            payload: encode(&flat),
        }
    }

    pub fn params(&self) -> Result<Vec<f64>, NetError> {
        let bytes =
            base64::engine::general_purpose::STANDARD.decode(&self.payload).map_err(|e| NetError::Checkpoint(format!("payload: {e}")))?;
        if bytes.len() != self.param_count * 4 {
            return Err(NetError::Checkpoint(format!("payload holds {} bytes, expected {} parameters", bytes.len(), self.param_count)));
        }
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect())
    }

    pub fn model(&self) -> Result<Model, NetError> {
        let shape = |i: usize| -> Result<MlpParams, NetError> {
            let h = self.heads.get(i).ok_or_else(|| NetError::Checkpoint("missing head shape".into()))?;
            Ok(MlpParams::zeros(h.input_dim, h.hidden, h.dropout))
        };
        let mut model = match self.model_kind {
            ModelKind::Embedding => Model::Embedding(shape(0)?),
            ModelKind::Linguistic => Model::Linguistic(shape(0)?),
            ModelKind::Fusion => Model::Fusion(FusionParams { emb: shape(0)?, ling: shape(1)?, gate: 0.0 }),
        };
        if model.param_count() != self.param_count {
            return Err(NetError::Checkpoint("head shapes disagree with parameter count".into()));
        }
        let params = self.params()?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(NetError::Checkpoint("non-finite parameter".into()));
        }
        model.set_flat(&params);
        Ok(model)
    }

    pub fn predictor(&self) -> Result<Predictor, NetError> {
        Ok(Predictor { model: self.model()?, standardizer: self.standardizer.clone() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetError> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| NetError::Checkpoint(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(NetError::Checkpoint(format!("unsupported checkpoint {} v{}", ck.format, ck.version)));
        }
        ck.model()?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<(), NetError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| NetError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, NetError> {
        let text = std::fs::read_to_string(path).map_err(|e| NetError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// A decoded checkpoint ready for inference.
#[derive(Debug, Clone)]
pub struct Predictor {
    pub model: Model,
    pub standardizer: Option<Standardizer>,
}

impl Predictor {
    /// Case probability. Linguistic inputs are raw features; the stored
    /// standardizer is applied here.
    pub fn predict_proba(&self, x: ModelInput<'_>) -> Result<f64, NetError> {
        let scaled;
        let ling = match (&self.standardizer, x.ling) {
            (Some(s), Some(l)) => {
                if l.len() != s.dim() {
                    return Err(NetError::Shape(format!("feature input has {} values, model expects {}", l.len(), s.dim())));
                }
                scaled = s.transform(l);
                Some(scaled.as_slice())
            }
            (_, l) => l,
        };
        Ok(p_case(self.model.logits(ModelInput { emb: x.emb, ling })?))
    }
}

pub fn predict_proba(checkpoint: &Checkpoint, x: ModelInput<'_>) -> Result<f64, NetError> {
    checkpoint.predictor()?.predict_proba(x)
}

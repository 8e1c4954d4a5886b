use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{MlpCache, MlpParams, CLASSES};
use super::NetError;

/// Two MLP branches whose logits are mixed by a learnable convex gate:
/// logits = a * z_emb + (1 - a) * z_ling, a = sigmoid(g).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionParams {
    pub emb: MlpParams,
    pub ling: MlpParams,
    pub gate: f64,
}

#[derive(Debug, Clone)]
pub struct FusionCache {
    pub emb: MlpCache,
    pub ling: MlpCache,
    pub alpha: f64,
    pub logits: [f64; CLASSES],
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl FusionParams {
    /// Branches initialized in order (embedding first) from `rng`; g = 0.
    pub fn init<R: Rng>(
        emb_dim: usize,
        emb_hidden: usize,
        emb_dropout: f64,
        ling_dim: usize,
        ling_hidden: usize,
        ling_dropout: f64,
        rng: &mut R,
    ) -> Self {
        let emb = MlpParams::init(emb_dim, emb_hidden, emb_dropout, rng);
        let ling = MlpParams::init(ling_dim, ling_hidden, ling_dropout, rng);
        Self { emb, ling, gate: 0.0 }
    }

    pub fn param_count(&self) -> usize {
        self.emb.flat.len() + self.ling.flat.len() + 1
    }

    /// Embedding branch, then linguistic branch, then g.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        v.extend(&self.emb.flat);
        v.extend(&self.ling.flat);
        v.push(self.gate);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        let (ne, nl) = (self.emb.flat.len(), self.ling.flat.len());
        assert_eq!(flat.len(), ne + nl + 1, "fusion parameter count");
        self.emb.flat.copy_from_slice(&flat[..ne]);
        self.ling.flat.copy_from_slice(&flat[ne..ne + nl]);
        self.gate = flat[ne + nl];
    }

    pub fn alpha(&self) -> f64 {
        sigmoid(self.gate)
    }

    pub fn forward<R: Rng>(&self, x_emb: &[f64], x_ling: &[f64], rng: Option<&mut R>) -> Result<FusionCache, NetError> {
        let (me, ml) = match rng {
            Some(r) => (Some(self.emb.sample_mask(r)), Some(self.ling.sample_mask(r))),
            None => (None, None),
        };
        self.forward_with_masks(x_emb, x_ling, me, ml)
    }

    pub fn forward_with_masks(
        &self,
        x_emb: &[f64],
        x_ling: &[f64],
        mask_emb: Option<Vec<f64>>,
        mask_ling: Option<Vec<f64>>,
    ) -> Result<FusionCache, NetError> {
        let emb = self.emb.forward_with_mask(x_emb, mask_emb)?;
        let ling = self.ling.forward_with_mask(x_ling, mask_ling)?;
        let alpha = self.alpha();
        let mut logits = [0.0; CLASSES];
        for k in 0..CLASSES {
            logits[k] = alpha * emb.logits[k] + (1.0 - alpha) * ling.logits[k];
        }
        Ok(FusionCache { emb, ling, alpha, logits })
    }

    pub fn logits(&self, x_emb: &[f64], x_ling: &[f64]) -> Result<[f64; CLASSES], NetError> {
        Ok(self.forward_with_masks(x_emb, x_ling, None, None)?.logits)
    }

    /// Adds d(loss)/d(params) into `grad` (flat layout of [`Self::to_flat`]).
    pub fn accumulate_grad(&self, cache: &FusionCache, dlogits: [f64; CLASSES], grad: &mut [f64]) {
        let a = cache.alpha;
        let (ne, nl) = (self.emb.flat.len(), self.ling.flat.len());
        let de = [a * dlogits[0], a * dlogits[1]];
        let dl = [(1.0 - a) * dlogits[0], (1.0 - a) * dlogits[1]];
        self.emb.accumulate_grad(&cache.emb, de, &mut grad[..ne]);
        self.ling.accumulate_grad(&cache.ling, dl, &mut grad[ne..ne + nl]);
        let diff: f64 = (0..CLASSES).map(|k| dlogits[k] * (cache.emb.logits[k] - cache.ling.logits[k])).sum();
        grad[ne + nl] += a * (1.0 - a) * diff;
    }

    pub fn backward(&self, cache: &FusionCache, target: usize) -> Vec<f64> {
        let mut g = vec![0.0; self.param_count()];
        self.accumulate_grad(cache, super::mlp::dlogits(cache.logits, target), &mut g);
        g
    }
}

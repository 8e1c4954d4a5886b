use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NetError;

/// Number of output classes. Index 0 is Case, index 1 is Control.
pub const CLASSES: usize = 2;
pub const CASE: usize = 0;
pub const CONTROL: usize = 1;

/// input -> hidden (ReLU, dropout) -> 2 logits.
///
/// Parameters live in one flat buffer laid out as W1 (h x d, row-major), b1
/// (h), W2 (2 x h, row-major), b2 (2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub flat: Vec<f64>,
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    pub x: Vec<f64>,
    pub pre: Vec<f64>,
    /// Post-ReLU, post-dropout activations.
    pub act: Vec<f64>,
    /// Per-unit dropout multiplier (0 or 1/(1-p)); all ones in eval mode.
    pub mask: Vec<f64>,
    pub logits: [f64; CLASSES],
}

impl MlpParams {
    pub fn param_count(input_dim: usize, hidden: usize) -> usize {
        hidden * input_dim + hidden + CLASSES * hidden + CLASSES
    }

    pub fn zeros(input_dim: usize, hidden: usize, dropout: f64) -> Self {
        Self { input_dim, hidden, dropout, flat: vec![0.0; Self::param_count(input_dim, hidden)] }
    }

    /// Every weight and bias drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
    /// fan_in = d for the first layer and h for the second.
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, dropout: f64, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden, dropout);
        let b1 = 1.0 / (input_dim as f64).sqrt();
        let b2 = 1.0 / (hidden as f64).sqrt();
        let split = hidden * input_dim + hidden;
        for (i, v) in p.flat.iter_mut().enumerate() {
            let bound = if i < split { b1 } else { b2 };
            *v = rng.random_range(-bound..bound);
        }
        p
    }

    pub fn from_parts(w1: &[Vec<f64>], b1: &[f64], w2: &[Vec<f64>], b2: &[f64], dropout: f64) -> Result<Self, NetError> {
        let h = b1.len();
        let d = w1.first().map(Vec::len).unwrap_or(0);
        if w1.len() != h || w1.iter().any(|r| r.len() != d) || w2.len() != CLASSES || w2.iter().any(|r| r.len() != h) || b2.len() != CLASSES
        {
            return Err(NetError::Shape("inconsistent layer shapes".into()));
        }
        let mut flat = Vec::with_capacity(Self::param_count(d, h));
        w1.iter().for_each(|r| flat.extend(r));
        flat.extend(b1);
        w2.iter().for_each(|r| flat.extend(r));
        flat.extend(b2);
        Ok(Self { input_dim: d, hidden: h, dropout, flat })
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let w1 = self.hidden * self.input_dim;
        let b1 = w1 + self.hidden;
        let w2 = b1 + CLASSES * self.hidden;
        (w1, b1, w2)
    }

    pub fn w1(&self) -> &[f64] {
        &self.flat[..self.hidden * self.input_dim]
    }

    pub fn w2(&self) -> &[f64] {
        let (_, b1, w2) = self.offsets();
        &self.flat[b1..w2]
    }

    /// Draws a dropout mask; all ones when the rate is 0.
    pub fn sample_mask<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        if self.dropout <= 0.0 {
            return vec![1.0; self.hidden];
        }
        let keep = 1.0 / (1.0 - self.dropout);
        (0..self.hidden).map(|_| if rng.random::<f64>() < self.dropout { 0.0 } else { keep }).collect()
    }

    /// Forward pass. `rng` present means train mode (dropout active).
    pub fn forward<R: Rng>(&self, x: &[f64], rng: Option<&mut R>) -> Result<MlpCache, NetError> {
        let mask = match rng {
            Some(r) => Some(self.sample_mask(r)),
            None => None,
        };
        self.forward_with_mask(x, mask)
    }

    /// Forward pass with an explicit dropout mask (`None` = eval mode).
    pub fn forward_with_mask(&self, x: &[f64], mask: Option<Vec<f64>>) -> Result<MlpCache, NetError> {
        if x.len() != self.input_dim {
            return Err(NetError::Shape(format!("input has {} values, model expects {}", x.len(), self.input_dim)));
        }
        let mask = mask.unwrap_or_else(|| vec![1.0; self.hidden]);
        let (w1_end, b1_end, w2_end) = self.offsets();
        let (w1, b1) = (&self.flat[..w1_end], &self.flat[w1_end..b1_end]);
        let (w2, b2) = (&self.flat[b1_end..w2_end], &self.flat[w2_end..]);
        let d = self.input_dim;
        let mut pre = vec![0.0; self.hidden];
        let mut act = vec![0.0; self.hidden];
        for j in 0..self.hidden {
            let row = &w1[j * d..(j + 1) * d];
            pre[j] = b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            act[j] = relu(pre[j]) * mask[j];
        }
        let mut logits = [0.0; CLASSES];
        for (k, l) in logits.iter_mut().enumerate() {
            let row = &w2[k * self.hidden..(k + 1) * self.hidden];
            *l = b2[k] + row.iter().zip(&act).map(|(w, a)| w * a).sum::<f64>();
        }
        Ok(MlpCache { x: x.to_vec(), pre, act, mask, logits })
    }

    /// Eval-mode logits.
    pub fn logits(&self, x: &[f64]) -> Result<[f64; CLASSES], NetError> {
        Ok(self.forward_with_mask(x, None)?.logits)
    }

    /// Adds d(loss)/d(params) to `grad` given d(loss)/d(logits).
    pub fn accumulate_grad(&self, cache: &MlpCache, dlogits: [f64; CLASSES], grad: &mut [f64]) {
        let (w1_end, b1_end, w2_end) = self.offsets();
        let d = self.input_dim;
        let h = self.hidden;
        let w2 = &self.flat[b1_end..w2_end];
        for k in 0..CLASSES {
            grad[w2_end + k] += dlogits[k];
            for j in 0..h {
                grad[b1_end + k * h + j] += dlogits[k] * cache.act[j];
            }
        }
        for j in 0..h {
            if cache.pre[j] <= 0.0 || cache.mask[j] == 0.0 {
                continue;
            }
            let dact: f64 = (0..CLASSES).map(|k| dlogits[k] * w2[k * h + j]).sum();
            let dpre = dact * cache.mask[j];
            grad[w1_end + j] += dpre;
            let row = &mut grad[j * d..(j + 1) * d];
            for (g, xv) in row.iter_mut().zip(&cache.x) {
                *g += dpre * xv;
            }
        }
    }

    /// Gradient of the cross-entropy of one example.
    pub fn backward(&self, cache: &MlpCache, target: usize) -> Vec<f64> {
        let mut g = vec![0.0; self.flat.len()];
        self.accumulate_grad(cache, dlogits(cache.logits, target), &mut g);
        g
    }
}

/// ReLU that keeps NaN visible instead of mapping it to 0.
fn relu(x: f64) -> f64 {
    if x > 0.0 || x.is_nan() {
        x
    } else {
        0.0
    }
}

/// softmax(z) - onehot(target).
pub fn dlogits(z: [f64; CLASSES], target: usize) -> [f64; CLASSES] {
    let p = softmax(z);
    let mut d = p;
    d[target] -= 1.0;
    d
}

pub fn softmax(z: [f64; CLASSES]) -> [f64; CLASSES] {
    let m = z[0].max(z[1]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp()];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

/// -log softmax(z)[target], computed stably.
pub fn cross_entropy(z: [f64; CLASSES], target: usize) -> f64 {
    let m = z[0].max(z[1]);
    let lse = m + ((z[0] - m).exp() + (z[1] - m).exp()).ln();
    lse - z[target]
}

/// Case probability from logits. Equal logits give exactly 0.5, and the
/// result is never >= 0.5 when the Control logit is strictly larger, so
/// thresholding at 0.5 reproduces argmax with ties going to Case.
pub fn p_case(z: [f64; CLASSES]) -> f64 {
    let p = 1.0 / (1.0 + (z[CONTROL] - z[CASE]).exp());
    if z[CONTROL] > z[CASE] && p >= 0.5 {
        f64::from_bits(0.5f64.to_bits() - 1)
    } else {
        p
    }
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub exaggeration: f64,
    pub exaggeration_iters: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self { perplexity: 30.0, iterations: 1000, exaggeration: 12.0, exaggeration_iters: 250, learning_rate: 200.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneResult {
    pub coords: Vec<[f64; 2]>,
    pub kl: f64,
    /// (iteration, KL) every 50 iterations and at the end.
    pub kl_trace: Vec<(usize, f64)>,
    /// Per-point Gaussian bandwidths found by the perplexity search.
    pub sigmas: Vec<f64>,
    /// True when identical inputs forced the jitter fallback.
    pub jittered: bool,
}

const P_FLOOR: f64 = 1e-12;
const ENTROPY_TOL: f64 = 1e-5;
const MIN_GAIN: f64 = 0.01;
const KL_EVERY: usize = 50;

/// Rounds to single precision. Inputs that differ only by rounding noise
/// (a rotated or permuted-axis copy of the data) then give identical
/// affinities, and the run becomes a function of the distances alone.
fn snap(v: f64) -> f64 {
    if v < f32::MAX as f64 {
        v as f32 as f64
    } else {
        v
    }
}

pub(crate) fn sq_distances(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = snap(v);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Conditional row P_{j|i} for precision `beta` and its Shannon entropy
/// (nats).
fn row_entropy(dist: &[f64], i: usize, beta: f64, row: &mut [f64]) -> f64 {
    let dmin = dist.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (j, p) in row.iter_mut().enumerate() {
        *p = if j == i { 0.0 } else { (-(dist[j] - dmin) * beta).exp() };
        sum += *p;
    }
    let mut h = 0.0;
    for (j, p) in row.iter_mut().enumerate() {
        *p /= sum;
        if j != i && *p > 0.0 {
            h += beta * (dist[j] - dmin) * *p;
        }
    }
    h + sum.ln()
}

/// Binary search on beta = 1 / (2 sigma^2) per point, run to floating-point
/// resolution, so the row entropy lands within 1e-5 of ln(perplexity).
/// Returns row-normalised P_{j|i} and sigmas.
pub fn conditional_p(dist: &[f64], n: usize, perplexity: f64) -> (Vec<f64>, Vec<f64>) {
    let target = perplexity.ln();
    let mut p = vec![0.0; n * n];
    let mut sigmas = vec![0.0; n];
    for i in 0..n {
        let d = &dist[i * n..(i + 1) * n];
        let row = &mut p[i * n..(i + 1) * n];
        let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
        let scale = d.iter().copied().fold(0.0, f64::max);
        if scale > 0.0 {
            beta = 1.0 / scale;
        }
        let off = d.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v);
        let dmin = off.clone().fold(f64::INFINITY, f64::min);
        // equal distances: the row is uniform and its entropy ignores beta
        let flat_row = scale - dmin <= 1e-12 * scale.max(f64::MIN_POSITIVE);
        for _ in 0..if flat_row { 1 } else { 200 } {
            let h = row_entropy(d, i, beta, row);
            let diff = h - target;
            if diff == 0.0 {
                break;
            }
            let prev = beta;
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
            // bisect to the bracket's resolution so beta varies smoothly
            // with the distances
            if beta == prev || (hi.is_finite() && hi - lo <= f64::EPSILON * hi) {
                row_entropy(d, i, beta, row);
                break;
            }
        }
        debug_assert!(flat_row || (row_entropy(d, i, beta, &mut row.to_vec()) - target).abs() < ENTROPY_TOL);
        sigmas[i] = (1.0 / (2.0 * beta)).sqrt();
    }
    (p, sigmas)
}

fn joint_p(cond: &[f64], n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(P_FLOOR);
            }
        }
    }
    p
}

/// Student-t kernel numerators and their sum.
fn q_num(y: &[[f64; 2]]) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = v;
            num[j * n + i] = v;
            sum += 2.0 * v;
        }
    }
    (num, sum)
}

fn kl(p: &[f64], num: &[f64], sum: f64, n: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let pij = p[i * n + j];
                let q = (num[i * n + j] / sum).max(P_FLOOR);
                total += pij * (pij / q).ln();
            }
        }
    }
    total
}

/// Exact O(n^2) t-SNE to two dimensions.
///
/// Gradient descent with momentum and per-parameter gains; P is multiplied by
/// the exaggeration factor for the first `exaggeration_iters` iterations,
/// during which momentum is 0.5 (0.8 afterwards). If every input row is
/// identical the data get a seeded jitter of scale 1e-6 before the affinity
/// computation, and `jittered` is set.
pub fn tsne(x: &[Vec<f64>], cfg: &TsneConfig) -> Result<TsneResult, SimError> {
    let n = x.len();
    if n < 3 {
        return Err(SimError::Invalid(format!("t-SNE needs at least 3 points, got {n}")));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(SimError::Invalid("input rows differ in dimension".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(SimError::Invalid("input contains non-finite values".into()));
    }
    if !(cfg.perplexity > 0.0 && cfg.perplexity < n as f64) {
        return Err(SimError::Invalid(format!("perplexity {} must be in (0, {n})", cfg.perplexity)));
    }
    if cfg.iterations == 0 || cfg.learning_rate <= 0.0 {
        return Err(SimError::Invalid("iterations and learning rate must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dist = sq_distances(x);
    let mut jittered = false;
    if dist.iter().all(|&v| v == 0.0) {
        tracing::warn!(n, "all t-SNE inputs identical; adding jitter");
        let mut jrng = ChaCha8Rng::seed_from_u64(cfg.seed);
        jrng.set_stream(1);
        let xj: Vec<Vec<f64>> = x
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| {
                        let z: f64 = StandardNormal.sample(&mut jrng);
                        v + 1e-6 * z
                    })
                    .collect()
            })
            .collect();
        dist = sq_distances(&xj);
        jittered = true;
    }
    let (cond, sigmas) = conditional_p(&dist, n, cfg.perplexity);
    let p = joint_p(&cond, n);

    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            [1e-4 * a, 1e-4 * b]
        })
        .collect();
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut trace = Vec::new();
    let mut grad = vec![[0.0; 2]; n];

    for it in 0..cfg.iterations {
        let early = it < cfg.exaggeration_iters;
        let exag = if early { cfg.exaggeration } else { 1.0 };
        let momentum = if early { 0.5 } else { 0.8 };
        let (num, sum) = q_num(&y);
        for i in 0..n {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = (exag * p[i * n + j] - num[i * n + j] / sum) * num[i * n + j];
                g[0] += w * (y[i][0] - y[j][0]);
                g[1] += w * (y[i][1] - y[j][1]);
            }
            grad[i] = [4.0 * g[0], 4.0 * g[1]];
        }
        for i in 0..n {
            for k in 0..2 {
                let same_sign = (grad[i][k] > 0.0) == (update[i][k] > 0.0);
                gains[i][k] = if same_sign { (gains[i][k] * 0.8).max(MIN_GAIN) } else { gains[i][k] + 0.2 };
                update[i][k] = momentum * update[i][k] - cfg.learning_rate * gains[i][k] * grad[i][k];
                y[i][k] += update[i][k];
            }
        }
        let mean = [y.iter().map(|v| v[0]).sum::<f64>() / n as f64, y.iter().map(|v| v[1]).sum::<f64>() / n as f64];
        y.iter_mut().for_each(|v| {
            v[0] -= mean[0];
            v[1] -= mean[1];
        });
        if (it + 1) % KL_EVERY == 0 || it + 1 == cfg.iterations {
            let (num, sum) = q_num(&y);
            trace.push((it + 1, kl(&p, &num, sum, n)));
        }
    }
    if y.iter().flatten().any(|v| !v.is_finite()) {
        return Err(SimError::Invalid("t-SNE diverged to non-finite coordinates".into()));
    }
    let kl_final = trace.last().map(|t| t.1).unwrap_or(f64::NAN);
    Ok(TsneResult { coords: y, kl: kl_final, kl_trace: trace, sigmas, jittered })
}

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{content_key, EmbedError, EmbeddingRecord};
use crate::net::HttpClient;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Sentence,
    Tokens,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    pub url: String,
    pub model: String,
    /// Provider name recorded on every fetched record.
    pub provider: String,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub pooling: Option<String>,
}

fn default_batch() -> usize {
    16
}

fn default_in_flight() -> usize {
    4
}

#[derive(Serialize)]
struct Request<'a> {
    model: &'a str,
    inputs: &'a [String],
    granularity: Granularity,
}

fn parse_vector(v: &Value, dim: usize, what: &str) -> Result<Vec<f64>, EmbedError> {
    let arr = v.as_array().ok_or_else(|| EmbedError::Schema(format!("{what} is not an array")))?;
    if arr.len() != dim {
        return Err(EmbedError::Schema(format!("{what} has {} values, expected dim {dim}", arr.len())));
    }
    arr.iter()
        .map(|x| x.as_f64().filter(|f| f.is_finite()).ok_or_else(|| EmbedError::Schema(format!("{what} contains a non-numeric value"))))
        .collect()
}

fn parse_dim(body: &Value) -> Result<usize, EmbedError> {
    match body.get("dim").and_then(Value::as_u64) {
        Some(d) if d > 0 => Ok(d as usize),
        _ => Err(EmbedError::Schema("missing or invalid \"dim\"".into())),
    }
}

fn vectors(body: &Value, n: usize) -> Result<&Vec<Value>, EmbedError> {
    let v = body.get("vectors").and_then(Value::as_array).ok_or_else(|| EmbedError::Schema("missing \"vectors\" array".into()))?;
    if v.len() != n {
        return Err(EmbedError::Schema(format!("{} vectors for {n} inputs", v.len())));
    }
    Ok(v)
}

struct Batch {
    sentence: Vec<Vec<f64>>,
    tokens: Option<Vec<(Vec<Vec<f64>>, Vec<String>)>>,
    dim: usize,
}

async fn fetch_batch(
    client: &HttpClient,
    cfg: &RemoteConfig,
    offset: usize,
    texts: &[String],
    granularity: Granularity,
) -> Result<Batch, EmbedError> {
    let body = client.post_json(&cfg.url, &Request { model: &cfg.model, inputs: texts, granularity: Granularity::Sentence }).await?;
    let dim = parse_dim(&body)?;
    let sentence = vectors(&body, texts.len())?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_vector(v, dim, &format!("vector at index {}", offset + i)))
        .collect::<Result<Vec<_>, _>>()?;
    let tokens = if granularity == Granularity::Tokens {
        let body = client.post_json(&cfg.url, &Request { model: &cfg.model, inputs: texts, granularity: Granularity::Tokens }).await?;
        if parse_dim(&body)? != dim {
            return Err(EmbedError::Schema("token response dim differs from sentence dim".into()));
        }
        let mats = vectors(&body, texts.len())?;
        let strings = body
            .get("tokens")
            .and_then(Value::as_array)
            .filter(|a| a.len() == texts.len())
            .ok_or_else(|| EmbedError::Schema("token response needs a \"tokens\" array aligned with inputs".into()))?;
        let mut out = Vec::with_capacity(texts.len());
        for (i, (m, s)) in mats.iter().zip(strings).enumerate() {
            let idx = offset + i;
            let rows = m
                .as_array()
                .ok_or_else(|| EmbedError::Schema(format!("token matrix at index {idx} is not an array")))?
                .iter()
                .enumerate()
                .map(|(j, r)| parse_vector(r, dim, &format!("token vector {j} at index {idx}")))
                .collect::<Result<Vec<_>, _>>()?;
            let strs: Vec<String> = serde_json::from_value(s.clone())
                .map_err(|_| EmbedError::Schema(format!("token strings at index {idx} are not strings")))?;
            if strs.len() != rows.len() {
                return Err(EmbedError::Schema(format!("token strings and vectors differ in length at index {idx}")));
            }
            out.push((rows, strs));
        }
        Some(out)
    } else {
        None
    };
    Ok(Batch { sentence, tokens, dim })
}

/// Embeds `texts` through the HTTP service, one record per text keyed by
/// content hash and returned in input order. Batches run concurrently up to
/// `max_in_flight`.
pub async fn fetch_remote(
    client: Arc<HttpClient>,
    cfg: &RemoteConfig,
    texts: &[String],
    granularity: Granularity,
) -> Result<Vec<EmbeddingRecord>, EmbedError> {
    let batch = cfg.batch_size.max(1);
    let sem = Arc::new(tokio::sync::Semaphore::new(cfg.max_in_flight.max(1)));
    let mut set = tokio::task::JoinSet::new();
    for (b, chunk) in texts.chunks(batch).enumerate() {
        let client = client.clone();
        let cfg = cfg.clone();
        let chunk = chunk.to_vec();
        let sem = sem.clone();
        set.spawn(async move {
            let _permit = sem.acquire_owned().await.expect("semaphore open");
            (b, fetch_batch(&client, &cfg, b * batch, &chunk, granularity).await)
        });
    }
    let mut results: Vec<Option<Batch>> = (0..texts.len().div_ceil(batch)).map(|_| None).collect();
    while let Some(joined) = set.join_next().await {
        let (b, res) = joined.map_err(|e| EmbedError::Schema(format!("request task failed: {e}")))?;
        results[b] = Some(res?);
    }
    let mut dim = None;
    let mut out = Vec::with_capacity(texts.len());
    let mut text_iter = texts.iter();
    for batch in results.into_iter().flatten() {
        if *dim.get_or_insert(batch.dim) != batch.dim {
            return Err(EmbedError::Schema("service changed dim between batches".into()));
        }
        let mut toks = batch.tokens.map(|t| t.into_iter());
        for sentence in batch.sentence {
            let text = text_iter.next().expect("one vector per text");
            let (tokens, token_strings) = match toks.as_mut().and_then(Iterator::next) {
                Some((t, s)) => (Some(t), Some(s)),
                None => (None, None),
            };
            let rec = EmbeddingRecord {
                key: content_key(text),
                provider: cfg.provider.clone(),
                dim: batch.dim,
                sentence,
                tokens,
                token_strings,
                pooling: cfg.pooling.clone(),
            };
            rec.validate()?;
            out.push(rec);
        }
    }
    Ok(out)
}

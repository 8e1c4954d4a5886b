//! Shared HTTP plumbing: network policy, JSON POST with retry and backoff,
//! and a token-bucket rate limiter.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

static HTTP_ATTEMPTS: AtomicU64 = AtomicU64::new(0);

/// Number of HTTP requests this process has attempted to send.
pub fn http_attempts() -> u64 {
    HTTP_ATTEMPTS.load(Ordering::SeqCst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkPolicy {
    Forbidden,
    #[default]
    Allowed,
}

impl std::str::FromStr for NetworkPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forbidden" => Ok(Self::Forbidden),
            "allowed" => Ok(Self::Allowed),
            other => Err(format!("unknown network policy {other:?} (expected forbidden or allowed)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("network access is forbidden in this run ({0})")]
    Forbidden(String),
    #[error("{url}: HTTP {status}: {body}")]
    Status { url: String, status: u16, body: String },
    #[error("{url}: {message}")]
    Transport { url: String, message: String },
    #[error("{url}: giving up after {attempts} attempts: {last}")]
    Exhausted { url: String, attempts: u32, last: String },
    #[error("{url}: response is not valid JSON: {message}")]
    Decode { url: String, message: String },
    #[error("environment variable {0} is not set")]
    MissingCredential(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetryPolicy {
    /// Total attempts, including the first.
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
    /// Seed for backoff jitter.
    pub jitter_seed: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 4, base_delay_ms: 250, max_delay_ms: 8_000, jitter_seed: 0 }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): base * 2^(retry-1), capped,
    /// scaled by a jitter factor in [0.5, 1.0).
    pub fn delay(&self, retry: u32, rng: &mut impl Rng) -> Duration {
        let exp = self.base_delay_ms.saturating_mul(1u64 << (retry.saturating_sub(1)).min(20));
        let capped = exp.min(self.max_delay_ms);
        let factor: f64 = rng.random_range(0.5..1.0);
        Duration::from_micros((capped as f64 * 1000.0 * factor) as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HttpSettings {
    pub timeout_ms: u64,
    pub retry: RetryPolicy,
    /// Name of the environment variable holding a bearer token, if any.
    pub token_env: Option<String>,
}

impl Default for HttpSettings {
    fn default() -> Self {
        Self { timeout_ms: 60_000, retry: RetryPolicy::default(), token_env: None }
    }
}

/// JSON-over-HTTP client honoring the run's network policy.
pub struct HttpClient {
    client: reqwest::Client,
    policy: NetworkPolicy,
    retry: RetryPolicy,
    token: Option<String>,
    rng: Mutex<ChaCha8Rng>,
}

fn retryable(status: u16) -> bool {
    status == 429 || status >= 500
}

impl HttpClient {
    pub fn new(settings: &HttpSettings, policy: NetworkPolicy) -> Result<Self, NetError> {
        let token = match &settings.token_env {
            Some(var) => Some(std::env::var(var).map_err(|_| NetError::MissingCredential(var.clone()))?),
            None => None,
        };
        let client = reqwest::Client::builder()
            .timeout(Duration::from_millis(settings.timeout_ms))
            .build()
            .map_err(|e| NetError::Transport { url: String::new(), message: e.to_string() })?;
        Ok(Self {
            client,
            policy,
            retry: settings.retry.clone(),
            token,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(settings.retry.jitter_seed)),
        })
    }

    pub fn policy(&self) -> NetworkPolicy {
        self.policy
    }

    /// POSTs `body` and decodes the JSON reply, retrying 429, 5xx and
    /// transport failures with exponential backoff.
    pub async fn post_json<B: Serialize + ?Sized>(&self, url: &str, body: &B) -> Result<serde_json::Value, NetError> {
        if self.policy == NetworkPolicy::Forbidden {
            return Err(NetError::Forbidden(url.to_string()));
        }
        let attempts = self.retry.max_attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            if attempt > 1 {
                let delay = {
                    let mut rng = self.rng.lock().expect("jitter rng lock");
                    self.retry.delay(attempt - 1, &mut *rng)
                };
                tracing::info!(url, attempt, delay_ms = delay.as_millis() as u64, "retrying after backoff");
                tokio::time::sleep(delay).await;
            }
            HTTP_ATTEMPTS.fetch_add(1, Ordering::SeqCst);
            let mut req = self.client.post(url).json(body);
            if let Some(tok) = &self.token {
                req = req.bearer_auth(tok);
            }
            match req.send().await {
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    let text = resp.text().await.unwrap_or_default();
                    if (200..300).contains(&status) {
                        return serde_json::from_str(&text).map_err(|e| NetError::Decode { url: url.to_string(), message: e.to_string() });
                    }
                    if !retryable(status) {
                        return Err(NetError::Status { url: url.to_string(), status, body: truncate(&text) });
                    }
                    last = format!("HTTP {status}");
                }
                Err(e) => last = e.to_string(),
            }
            tracing::warn!(url, attempt, error = %last, "request failed");
        }
        Err(NetError::Exhausted { url: url.to_string(), attempts, last })
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(500).collect()
}

/// Token bucket: `capacity` burst, refilled at `per_second` tokens/s.
pub struct RateLimiter {
    capacity: f64,
    per_second: f64,
    state: tokio::sync::Mutex<(f64, tokio::time::Instant)>,
}

impl RateLimiter {
    pub fn new(capacity: u32, per_second: f64) -> Self {
        let capacity = capacity.max(1) as f64;
        Self { capacity, per_second, state: tokio::sync::Mutex::new((capacity, tokio::time::Instant::now())) }
    }

    /// Unlimited when `per_second` is not positive.
    pub async fn acquire(&self) {
        if self.per_second <= 0.0 {
            return;
        }
        let mut st = self.state.lock().await;
        loop {
            let now = tokio::time::Instant::now();
            let elapsed = now.duration_since(st.1).as_secs_f64();
            st.0 = (st.0 + elapsed * self.per_second).min(self.capacity);
            st.1 = now;
            if st.0 >= 1.0 {
                st.0 -= 1.0;
                return;
            }
            let wait = (1.0 - st.0) / self.per_second;
            tokio::time::sleep(Duration::from_secs_f64(wait)).await;
        }
    }
}

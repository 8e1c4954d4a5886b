use std::future::Future;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::net::{HttpClient, HttpSettings, NetError, NetworkPolicy, RateLimiter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }
}

/// Chat-completion request. `None` knobs are left out of the wire body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
}

pub trait ChatClient: Send + Sync + 'static {
    fn provider(&self) -> &str;
    fn complete(&self, req: ChatRequest) -> impl Future<Output = Result<ChatResponse, NetError>> + Send;
}

/// Wire dialect of a provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApiKind {
    /// OpenAI-style endpoint; no top_k.
    #[default]
    Openai,
    /// OpenAI-compatible server that also accepts top_k (vLLM, TGI, llama.cpp).
    OpenaiTopK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub id: String,
    /// Full chat-completions URL.
    pub url: String,
    #[serde(default)]
    pub api: ApiKind,
    #[serde(default)]
    pub http: HttpSettings,
    #[serde(default = "default_rate")]
    pub requests_per_second: f64,
    #[serde(default = "default_burst")]
    pub burst: u32,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_rate() -> f64 {
    5.0
}

fn default_burst() -> u32 {
    5
}

fn default_in_flight() -> usize {
    4
}

/// Chat client over HTTP with a token bucket and an in-flight cap.
pub struct HttpChatClient {
    cfg: ProviderConfig,
    http: HttpClient,
    limiter: RateLimiter,
    permits: Semaphore,
    warned_top_k: AtomicBool,
}

impl HttpChatClient {
    pub fn new(cfg: ProviderConfig, policy: NetworkPolicy) -> Result<Self, NetError> {
        let http = HttpClient::new(&cfg.http, policy)?;
        Ok(Self {
            limiter: RateLimiter::new(cfg.burst, cfg.requests_per_second),
            permits: Semaphore::new(cfg.max_in_flight.max(1)),
            http,
            cfg,
            warned_top_k: AtomicBool::new(false),
        })
    }

    fn wire_body(&self, mut req: ChatRequest) -> ChatRequest {
        if self.cfg.api == ApiKind::Openai && req.top_k.is_some() {
            if !self.warned_top_k.swap(true, Ordering::Relaxed) {
                tracing::warn!(provider = %self.cfg.id, "provider does not accept top_k; omitting it");
            }
            req.top_k = None;
        }
        req
    }
}

/// Pulls `choices[0].message.content` out of a chat-completion response.
pub fn response_text(url: &str, v: &serde_json::Value) -> Result<String, NetError> {
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| NetError::Decode { url: url.into(), message: "missing choices[0].message.content".into() })
}

impl ChatClient for HttpChatClient {
    fn provider(&self) -> &str {
        &self.cfg.id
    }

    async fn complete(&self, req: ChatRequest) -> Result<ChatResponse, NetError> {
        let _permit = self.permits.acquire().await.expect("semaphore never closed");
        self.limiter.acquire().await;
        let body = self.wire_body(req);
        let v = self.http.post_json(&self.cfg.url, &body).await?;
        Ok(ChatResponse { text: response_text(&self.cfg.url, &v)? })
    }
}

impl<C: ChatClient> ChatClient for Arc<C> {
    fn provider(&self) -> &str {
        (**self).provider()
    }

    fn complete(&self, req: ChatRequest) -> impl Future<Output = Result<ChatResponse, NetError>> + Send {
        (**self).complete(req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(api: ApiKind) -> ProviderConfig {
        ProviderConfig {
            id: "p".into(),
            url: "http://127.0.0.1:9/v1/chat/completions".into(),
            api,
            http: HttpSettings::default(),
            requests_per_second: 0.0,
            burst: 1,
            max_in_flight: 1,
        }
    }

    fn req() -> ChatRequest {
        ChatRequest {
            model: "m".into(),
            messages: vec![ChatMessage::user("hi")],
            temperature: 1.0,
            top_p: None,
            top_k: Some(50),
            max_tokens: None,
            seed: None,
        }
    }

    #[test]
    fn top_k_dropped_for_plain_openai() {
        let c = HttpChatClient::new(cfg(ApiKind::Openai), NetworkPolicy::Forbidden).unwrap();
        let body = serde_json::to_value(c.wire_body(req())).unwrap();
        assert!(body.get("top_k").is_none());
        assert!(body.get("top_p").is_none());
        let c = HttpChatClient::new(cfg(ApiKind::OpenaiTopK), NetworkPolicy::Forbidden).unwrap();
        assert_eq!(serde_json::to_value(c.wire_body(req())).unwrap()["top_k"], 50);
    }

    #[test]
    fn content_extraction() {
        let v = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": "x"}}]});
        assert_eq!(response_text("u", &v).unwrap(), "x");
        assert!(response_text("u", &serde_json::json!({"choices": []})).is_err());
    }
}

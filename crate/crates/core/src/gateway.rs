//! Chat-completion clients: a live OpenAI-compatible client and a
//! fixture-backed mock with the same interface.

use std::path::Path;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;
use url::Url;

use crate::prompt::{PromptMode, PromptPayload};
use crate::retry::{retry_after, RetryPolicy, Verdict};
use crate::secret::ApiKey;

pub const DEFAULT_MODEL_CONCURRENCY: usize = 4;
pub const DEFAULT_MODEL_TIMEOUT_S: u64 = 180;
pub const MOCK_MODEL_ID: &str = "mock";

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("model unavailable after {attempts} attempt(s): {message}")]
    ModelUnavailable { attempts: u32, message: String },
    #[error("model rejected the request with status {status}: {message}")]
    ModelRejected { status: u16, message: String },
    #[error("model returned an empty completion")]
    EmptyCompletion,
    #[error("model response could not be decoded: {0}")]
    InvalidResponse(String),
    #[error("no mock route matches this prompt")]
    NoFixture,
    #[error("invalid model configuration: {0}")]
    Config(String),
}

/// Successful completion plus request telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub attempts: u32,
    pub latency: Duration,
}

impl Completion {
    pub fn retries(&self) -> u32 {
        self.attempts.saturating_sub(1)
    }
}

#[async_trait]
pub trait ModelGateway: Send + Sync {
    /// Identifier that goes into cache keys.
    fn model_id(&self) -> &str;
    async fn complete(&self, payload: &PromptPayload) -> Result<Completion, GatewayError>;
}

/// Opening/closing markers of a reasoning preamble to drop from replies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningDelimiters {
    pub open: String,
    pub close: String,
}

impl Default for ReasoningDelimiters {
    fn default() -> Self {
        ReasoningDelimiters {
            open: "<think>".into(),
            close: "</think>".into(),
        }
    }
}

/// Removes a reasoning block at the very start of `text`, if one is closed.
/// An unterminated block is left alone so nothing is silently lost.
pub fn strip_reasoning<'a>(text: &'a str, delims: &ReasoningDelimiters) -> &'a str {
    let trimmed = text.trim_start();
    if delims.open.is_empty() || !trimmed.starts_with(delims.open.as_str()) {
        return text;
    }
    match trimmed[delims.open.len()..].find(delims.close.as_str()) {
        Some(end) => trimmed[delims.open.len() + end + delims.close.len()..].trim_start(),
        None => text,
    }
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint_url: Url,
    pub api_key: ApiKey,
    pub model_id: String,
    pub timeout_s: u64,
    pub retry: RetryPolicy,
    pub reasoning: Option<ReasoningDelimiters>,
    pub max_in_flight: usize,
}

impl ModelConfig {
    pub fn new(endpoint_url: Url, api_key: ApiKey, model_id: impl Into<String>) -> Self {
        ModelConfig {
            endpoint_url,
            api_key,
            model_id: model_id.into(),
            timeout_s: DEFAULT_MODEL_TIMEOUT_S,
            retry: RetryPolicy {
                max_retries: 3,
                ..RetryPolicy::default()
            },
            reasoning: Some(ReasoningDelimiters::default()),
            max_in_flight: DEFAULT_MODEL_CONCURRENCY,
        }
    }

    pub fn max_retries(&self) -> u32 {
        self.retry.max_retries
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.timeout_s == 0 {
            return Err(GatewayError::Config("timeout_s must be > 0".into()));
        }
        if self.model_id.trim().is_empty() {
            return Err(GatewayError::Config("model_id must not be empty".into()));
        }
        Ok(())
    }

    fn completions_url(&self) -> String {
        format!(
            "{}/chat/completions",
            self.endpoint_url.as_str().trim_end_matches('/')
        )
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f32,
    max_tokens: u32,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    #[serde(default)]
    content: Option<String>,
}

enum Failure {
    Transient { message: String, wait: Option<Duration> },
    Rejected { status: u16, message: String },
    Invalid(String),
}

pub struct OpenAiCompatibleClient {
    cfg: ModelConfig,
    http: reqwest::Client,
    limiter: Semaphore,
}

impl OpenAiCompatibleClient {
    pub fn new(cfg: ModelConfig) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_s))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        let limiter = Semaphore::new(cfg.max_in_flight.max(1));
        Ok(OpenAiCompatibleClient { cfg, http, limiter })
    }

    async fn attempt(&self, body: &ChatRequest<'_>) -> Result<String, Failure> {
        let transient = |e: reqwest::Error| Failure::Transient {
            message: e.to_string(),
            wait: None,
        };
        let resp = self
            .http
            .post(self.cfg.completions_url())
            .bearer_auth(self.cfg.api_key.expose())
            .json(body)
            .send()
            .await
            .map_err(transient)?;
        let status = resp.status();
        let wait = retry_after(resp.headers());
        let bytes = resp.bytes().await.map_err(transient)?;
        if status.is_success() {
            let parsed: ChatResponse =
                serde_json::from_slice(&bytes).map_err(|e| Failure::Invalid(e.to_string()))?;
            let first = parsed
                .choices
                .into_iter()
                .next()
                .ok_or_else(|| Failure::Invalid("response has no choices".into()))?;
            return Ok(first.message.content.unwrap_or_default());
        }
        let message: String = String::from_utf8_lossy(&bytes).chars().take(500).collect();
        if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
            Err(Failure::Transient {
                message: format!("status {status}: {message}"),
                wait,
            })
        } else {
            Err(Failure::Rejected {
                status: status.as_u16(),
                message,
            })
        }
    }
}

#[async_trait]
impl ModelGateway for OpenAiCompatibleClient {
    fn model_id(&self) -> &str {
        &self.cfg.model_id
    }

    async fn complete(&self, payload: &PromptPayload) -> Result<Completion, GatewayError> {
        payload
            .validate()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        let mut messages = Vec::with_capacity(2);
        if !payload.system_text.is_empty() {
            messages.push(ChatMessage {
                role: "system",
                content: &payload.system_text,
            });
        }
        messages.push(ChatMessage {
            role: "user",
            content: &payload.user_text,
        });
        let body = ChatRequest {
            model: &self.cfg.model_id,
            messages,
            temperature: payload.model_params.temperature,
            max_tokens: payload.model_params.max_output_tokens,
        };

        let _permit = self.limiter.acquire().await.expect("limiter never closed");
        let started = Instant::now();
        let outcome = self
            .cfg
            .retry
            .run(
                |_| self.attempt(&body),
                |f| match f {
                    Failure::Transient { wait: Some(d), .. } => Verdict::RetryAfter(*d),
                    Failure::Transient { .. } => Verdict::Retry,
                    _ => Verdict::Fail,
                },
            )
            .await;
        let latency = started.elapsed();
        tracing::info!(
            model = %self.cfg.model_id,
            attempts = outcome.attempts,
            retries = outcome.attempts - 1,
            latency_ms = latency.as_millis() as u64,
            "chat completion finished"
        );

        let raw = match outcome.result {
            Ok(text) => text,
            Err(Failure::Transient { message, .. }) => {
                return Err(GatewayError::ModelUnavailable {
                    attempts: outcome.attempts,
                    message,
                })
            }
            Err(Failure::Rejected { status, message }) => {
                return Err(GatewayError::ModelRejected { status, message })
            }
            Err(Failure::Invalid(msg)) => return Err(GatewayError::InvalidResponse(msg)),
        };
        let text = match &self.cfg.reasoning {
            Some(d) => strip_reasoning(&raw, d).to_owned(),
            None => raw,
        };
        if text.trim().is_empty() {
            return Err(GatewayError::EmptyCompletion);
        }
        Ok(Completion {
            text,
            attempts: outcome.attempts,
            latency,
        })
    }
}

/// One mock mapping: matches on prompt mode and/or a user-text substring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockRoute {
    pub mode: Option<PromptMode>,
    pub user_text_contains: Option<String>,
    pub text: String,
}

impl MockRoute {
    fn matches(&self, payload: &PromptPayload) -> bool {
        self.mode.is_none_or(|m| m == payload.mode)
            && self
                .user_text_contains
                .as_deref()
                .is_none_or(|needle| payload.user_text.contains(needle))
    }
}

#[derive(Deserialize)]
struct RouteDoc {
    #[serde(default)]
    mode: Option<PromptMode>,
    #[serde(default)]
    user_text_contains: Option<String>,
    fixture: String,
}

#[derive(Debug, Error)]
pub enum MockConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed route file {path}: {message}")]
    Malformed { path: String, message: String },
}

/// Deterministic gateway returning canned text. The first matching route
/// wins, so more specific routes should come first.
#[derive(Debug, Default)]
pub struct MockGateway {
    routes: Vec<MockRoute>,
    delay: Duration,
    calls: AtomicU32,
}

impl MockGateway {
    pub fn new() -> Self {
        Self::default()
    }

    /// Answers every prompt with `text`.
    pub fn fixed(text: impl Into<String>) -> Self {
        Self::new().route(None, None, text)
    }

    pub fn route(
        mut self,
        mode: Option<PromptMode>,
        user_text_contains: Option<&str>,
        text: impl Into<String>,
    ) -> Self {
        self.routes.push(MockRoute {
            mode,
            user_text_contains: user_text_contains.map(str::to_owned),
            text: text.into(),
        });
        self
    }

    /// Sleeps this long before answering; lets tests hold requests in flight.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    /// Loads a `routes.json` list of `{mode?, user_text_contains?, fixture}`;
    /// fixture paths are relative to the file.
    pub fn from_routes_file(path: &Path) -> Result<Self, MockConfigError> {
        let io = |p: &Path, source| MockConfigError::Io {
            path: p.display().to_string(),
            source,
        };
        let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
        let docs: Vec<RouteDoc> =
            serde_json::from_str(&text).map_err(|e| MockConfigError::Malformed {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut gw = MockGateway::new();
        for doc in docs {
            let fixture = base.join(&doc.fixture);
            let body = std::fs::read_to_string(&fixture).map_err(|e| io(&fixture, e))?;
            gw = gw.route(doc.mode, doc.user_text_contains.as_deref(), body);
        }
        Ok(gw)
    }

    pub fn routes(&self) -> &[MockRoute] {
        &self.routes
    }

    pub fn calls(&self) -> u32 {
        self.calls.load(Ordering::SeqCst)
    }
}

#[async_trait]
impl ModelGateway for MockGateway {
    fn model_id(&self) -> &str {
        MOCK_MODEL_ID
    }

    async fn complete(&self, payload: &PromptPayload) -> Result<Completion, GatewayError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let started = Instant::now();
        if !self.delay.is_zero() {
            tokio::time::sleep(self.delay).await;
        }
        let route = self
            .routes
            .iter()
            .find(|r| r.matches(payload))
            .ok_or(GatewayError::NoFixture)?;
        if route.text.trim().is_empty() {
            return Err(GatewayError::EmptyCompletion);
        }
        Ok(Completion {
            text: route.text.clone(),
            attempts: 1,
            latency: started.elapsed(),
        })
    }
}

#[async_trait]
impl<G: ModelGateway + ?Sized> ModelGateway for Arc<G> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    async fn complete(&self, payload: &PromptPayload) -> Result<Completion, GatewayError> {
        (**self).complete(payload).await
    }
}

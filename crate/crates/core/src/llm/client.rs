use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::sha256_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmEndpointConfig {
    /// OpenAI-compatible API root; `/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token. Empty means no
    /// Authorization header.
    pub api_key_env: String,
    pub max_retries: u32,
    pub timeout_secs: f64,
    pub temperature: f64,
    /// First backoff delay; doubles on each retry.
    pub backoff_ms: u64,
    pub requests_per_minute: Option<u32>,
    pub max_in_flight: usize,
}

impl Default for LlmEndpointConfig {
    fn default() -> Self {
        LlmEndpointConfig {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            api_key_env: "LEANAUG_API_KEY".into(),
            max_retries: 3,
            timeout_secs: 120.0,
            temperature: 0.7,
            backoff_ms: 500,
            requests_per_minute: None,
            max_in_flight: 8,
        }
    }
}

impl LlmEndpointConfig {
    /// Same endpoint at temperature 0, used for judging and repair.
    pub fn deterministic(&self) -> Self {
        LlmEndpointConfig {
            temperature: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        let bad = |m: &str| Err(LlmError::Config(m.to_string()));
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return bad("timeout_secs must be positive");
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return bad("temperature must lie in [0, 2]");
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be at least 1");
        }
        if self.requests_per_minute == Some(0) {
            return bad("requests_per_minute must be at least 1");
        }
        if self.model.trim().is_empty() {
            return bad("model is empty");
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    /// Which template produced the prompt, e.g. `judge_consistency`.
    pub tag: String,
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChatResponse {
    pub text: String,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

impl ChatResponse {
    pub fn text(text: impl Into<String>) -> Self {
        ChatResponse {
            text: text.into(),
            ..ChatResponse::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    /// Worth retrying: connection problems, timeouts, 429 and 5xx.
    #[error("transient: {0}")]
    Transient(String),
    #[error("{0}")]
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("endpoint failed after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("endpoint error: {0}")]
    Fatal(String),
    #[error("invalid endpoint configuration: {0}")]
    Config(String),
}

pub trait Transport: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, TransportError>;
}

/// Chat-completions over HTTP.
pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
}

impl HttpTransport {
    pub fn new(cfg: &LlmEndpointConfig) -> Result<Self, LlmError> {
        cfg.validate()?;
        let api_key = if cfg.api_key_env.is_empty() {
            None
        } else {
            Some(std::env::var(&cfg.api_key_env).map_err(|_| {
                LlmError::Config(format!("environment variable {} is not set", cfg.api_key_env))
            })?)
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout()))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Ok(HttpTransport {
            agent,
            url: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            api_key,
        })
    }
}

impl Transport for HttpTransport {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let body = json!({
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
        });
        let mut builder = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            builder = builder.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = builder.send_json(&body).map_err(|e| TransportError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        if status == 429 || status >= 500 {
            return Err(TransportError::Transient(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(TransportError::Fatal(format!("HTTP {status}: {}", truncate(&text, 300))));
        }
        parse_chat_response(&text)
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Reads `choices[0].message.content` and the usage block of a
/// chat-completions reply.
pub fn parse_chat_response(body: &str) -> Result<ChatResponse, TransportError> {
    let v: Value = serde_json::from_str(body).map_err(|e| TransportError::Fatal(format!("malformed reply: {e}")))?;
    let text = v["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| TransportError::Fatal("reply has no choices[0].message.content".into()))?;
    Ok(ChatResponse {
        text: text.to_string(),
        prompt_tokens: v["usage"]["prompt_tokens"].as_u64(),
        completion_tokens: v["usage"]["completion_tokens"].as_u64(),
    })
}

/// Canned responses from a directory. For each request it tries
/// `<sha256 of prompt>.txt`, then `<tag>.txt`, then `default.txt`.
#[derive(Debug, Clone)]
pub struct FixtureTransport {
    dir: PathBuf,
}

impl FixtureTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureTransport { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl Transport for FixtureTransport {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let candidates = [
            format!("{}.txt", sha256_hex(&req.prompt)),
            format!("{}.txt", req.tag),
            "default.txt".to_string(),
        ];
        for name in &candidates {
            let path = self.dir.join(name);
            if path.is_file() {
                return std::fs::read_to_string(&path)
                    .map(ChatResponse::text)
                    .map_err(|e| TransportError::Fatal(format!("{}: {e}", path.display())));
            }
        }
        Err(TransportError::Fatal(format!(
            "no fixture for tag {} in {}",
            req.tag,
            self.dir.display()
        )))
    }
}

/// A transport backed by a closure, for scripting outcomes in tests.
pub struct FnTransport<F>(pub F);

impl<F> Transport for FnTransport<F>
where
    F: Fn(&ChatRequest) -> Result<ChatResponse, TransportError> + Send + Sync,
{
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, TransportError> {
        (self.0)(req)
    }
}

#[derive(Debug, Default)]
struct LimiterState {
    in_flight: usize,
    recent: VecDeque<Instant>,
}

/// Caps concurrent requests and, optionally, requests per rolling minute.
#[derive(Debug)]
pub struct RateLimiter {
    max_in_flight: usize,
    per_minute: Option<u32>,
    state: Mutex<LimiterState>,
    freed: Condvar,
}

pub struct Permit<'a>(&'a RateLimiter);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut st = self.0.state.lock().unwrap_or_else(|e| e.into_inner());
        st.in_flight -= 1;
        self.0.freed.notify_one();
    }
}

const WINDOW: Duration = Duration::from_secs(60);

impl RateLimiter {
    pub fn new(max_in_flight: usize, per_minute: Option<u32>) -> Self {
        RateLimiter {
            max_in_flight: max_in_flight.max(1),
            per_minute,
            state: Mutex::new(LimiterState::default()),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            let now = Instant::now();
            while st.recent.front().is_some_and(|t| now.duration_since(*t) >= WINDOW) {
                st.recent.pop_front();
            }
            let rate_wait = match self.per_minute {
                Some(n) if st.recent.len() >= n as usize => Some(WINDOW - now.duration_since(st.recent[0])),
                _ => None,
            };
            if st.in_flight < self.max_in_flight && rate_wait.is_none() {
                st.in_flight += 1;
                st.recent.push_back(now);
                return Permit(self);
            }
            st = match rate_wait {
                Some(d) => self.freed.wait_timeout(st, d).unwrap_or_else(|e| e.into_inner()).0,
                None => self.freed.wait(st).unwrap_or_else(|e| e.into_inner()),
            };
        }
    }

    pub fn in_flight(&self) -> usize {
        self.state.lock().unwrap_or_else(|e| e.into_inner()).in_flight
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub prompt_sha256: String,
    pub model: String,
    pub attempts: u32,
}

/// A configured endpoint: transport, retry policy and shared limiter.
#[derive(Clone)]
pub struct LlmClient {
    cfg: LlmEndpointConfig,
    transport: Arc<dyn Transport>,
    limiter: Arc<RateLimiter>,
}

impl std::fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmClient").field("cfg", &self.cfg).finish_non_exhaustive()
    }
}

impl LlmClient {
    pub fn new(cfg: LlmEndpointConfig, transport: Arc<dyn Transport>) -> Self {
        let limiter = Arc::new(RateLimiter::new(cfg.max_in_flight, cfg.requests_per_minute));
        LlmClient { cfg, transport, limiter }
    }

    pub fn http(cfg: LlmEndpointConfig) -> Result<Self, LlmError> {
        let t = HttpTransport::new(&cfg)?;
        Ok(LlmClient::new(cfg, Arc::new(t)))
    }

    /// A client for the same endpoint and limiter with another config,
    /// e.g. a deterministic one for judging.
    pub fn with_config(&self, cfg: LlmEndpointConfig) -> Self {
        LlmClient {
            cfg,
            transport: Arc::clone(&self.transport),
            limiter: Arc::clone(&self.limiter),
        }
    }

    pub fn config(&self) -> &LlmEndpointConfig {
        &self.cfg
    }

    /// Sends `prompt`, retrying transient failures up to `max_retries`
    /// times with exponential backoff.
    pub fn complete(&self, tag: &str, prompt: &str) -> Result<Completion, LlmError> {
        let req = ChatRequest {
            tag: tag.to_string(),
            model: self.cfg.model.clone(),
            prompt: prompt.to_string(),
            temperature: self.cfg.temperature,
        };
        let prompt_sha256 = sha256_hex(prompt);
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            let result = {
                let _permit = self.limiter.acquire();
                self.transport.complete(&req)
            };
            match result {
                Ok(resp) => {
                    tracing::info!(
                        tag,
                        prompt_sha256 = %prompt_sha256,
                        attempt,
                        prompt_tokens = resp.prompt_tokens,
                        completion_tokens = resp.completion_tokens,
                        "llm call"
                    );
                    return Ok(Completion {
                        text: resp.text,
                        prompt_sha256,
                        model: self.cfg.model.clone(),
                        attempts: attempt,
                    });
                }
                Err(TransportError::Fatal(m)) => {
                    tracing::warn!(tag, prompt_sha256 = %prompt_sha256, error = %m, "llm call failed");
                    return Err(LlmError::Fatal(m));
                }
                Err(TransportError::Transient(m)) => {
                    tracing::warn!(tag, prompt_sha256 = %prompt_sha256, attempt, error = %m, "llm call failed, retrying");
                    if attempt > self.cfg.max_retries {
                        return Err(LlmError::Exhausted { attempts: attempt, last: m });
                    }
                    let delay = self.cfg.backoff_ms.saturating_mul(1u64 << (attempt - 1).min(16));
                    if delay > 0 {
                        std::thread::sleep(Duration::from_millis(delay));
                    }
                }
            }
        }
    }
}

//! Model backends: a generic chat-completions client, a perfect oracle and
//! a fixture replayer.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;
use std::time::Duration;

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::HarnessError;
use crate::prompting::PromptStyle;
use crate::taskgen::{Answer, Rendering};

static TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\w+|[^\w\s]").unwrap());

/// Word-and-punctuation count, used where a backend reports no usage.
pub fn approx_tokens(text: &str) -> u64 {
    TOKEN.find_iter(text).count() as u64
}

fn d_temperature() -> f64 {
    0.0
}
fn d_max_tokens() -> u32 {
    4096
}
fn d_timeout_secs() -> u64 {
    120
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 5, base_delay_ms: 500, max_delay_ms: 30_000 }
    }
}

impl RetryPolicy {
    /// Exponential delay before retry `attempt` (1-based), jittered into its upper half.
    fn delay(&self, attempt: u32) -> Duration {
        let full = self.base_delay_ms.saturating_mul(1u64 << attempt.min(20)).min(self.max_delay_ms);
        let low = full / 2;
        Duration::from_millis(rand::rng().random_range(low..=full.max(low)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    HttpChat {
        /// Full URL of the chat-completions route.
        endpoint: String,
        model: String,
        #[serde(default = "d_temperature")]
        temperature: f64,
        #[serde(default = "d_max_tokens")]
        max_tokens: u32,
        #[serde(default)]
        presence_penalty: f64,
        /// Environment variable holding the bearer token.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        auth_env: Option<String>,
        #[serde(default = "d_timeout_secs")]
        timeout_secs: u64,
        #[serde(default)]
        retry: RetryPolicy,
        /// Ask for per-token log-likelihoods.
        #[serde(default)]
        logprobs: bool,
    },
    PerfectOracle,
    Scripted {
        fixture: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capabilities {
    pub returns_token_counts: bool,
    pub returns_token_likelihoods: bool,
}

impl BackendSpec {
    pub fn capabilities(&self) -> Capabilities {
        match self {
            BackendSpec::HttpChat { logprobs, .. } => {
                Capabilities { returns_token_counts: true, returns_token_likelihoods: *logprobs }
            }
            BackendSpec::PerfectOracle => Capabilities { returns_token_counts: true, returns_token_likelihoods: false },
            BackendSpec::Scripted { .. } => Capabilities { returns_token_counts: true, returns_token_likelihoods: true },
        }
    }

    pub fn name(&self) -> String {
        match self {
            BackendSpec::HttpChat { model, .. } => model.clone(),
            BackendSpec::PerfectOracle => "perfect-oracle".into(),
            BackendSpec::Scripted { .. } => "scripted".into(),
        }
    }
}

/// What a backend sees of one prompt.
#[derive(Clone, Debug)]
pub struct Request<'a> {
    pub instance_id: &'a str,
    pub rendering: Rendering,
    pub style: PromptStyle,
    pub prompt: &'a str,
    /// Read only by the perfect oracle.
    pub truth: &'a Answer,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub text: String,
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
    pub token_logprobs: Option<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("retryable failure: {0}")]
    Transient(String),
    #[error("request failed: {0}")]
    Fatal(String),
    #[error("no scripted reply for {0}")]
    FixtureMissing(String),
}

/// One scripted reply. `rendering` and `style` narrow the match when set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub instance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rendering: Option<Rendering>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<PromptStyle>,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_logprobs: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    /// Artificial latency per reply.
    #[serde(default)]
    pub delay_ms: u64,
    pub responses: Vec<FixtureEntry>,
}

impl Fixture {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::FixtureMissing(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        let text = serde_json::to_string_pretty(self).expect("fixture serialises");
        std::fs::write(path, text).map_err(|e| HarnessError::Io(path.to_path_buf(), e))
    }
}

type FixtureKey = (String, Option<Rendering>, Option<PromptStyle>);

pub enum Backend {
    Http { client: reqwest::Client, spec: BackendSpec, token: Option<String> },
    PerfectOracle,
    Scripted { delay: Duration, replies: HashMap<FixtureKey, FixtureEntry> },
}

impl Backend {
    pub fn from_spec(spec: &BackendSpec) -> Result<Self, HarnessError> {
        match spec {
            BackendSpec::HttpChat { auth_env, timeout_secs, .. } => {
                let token = match auth_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| {
                        HarnessError::Config(format!("environment variable {var} is not set"))
                    })?),
                    None => None,
                };
                let client = reqwest::Client::builder()
                    .timeout(Duration::from_secs(*timeout_secs))
                    .build()
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                Ok(Backend::Http { client, spec: spec.clone(), token })
            }
            BackendSpec::PerfectOracle => Ok(Backend::PerfectOracle),
            BackendSpec::Scripted { fixture } => Ok(Self::scripted(Fixture::load(fixture)?)),
        }
    }

    pub fn scripted(fixture: Fixture) -> Self {
        let replies = fixture
            .responses
            .into_iter()
            .map(|e| ((e.instance_id.clone(), e.rendering, e.style), e))
            .collect();
        Backend::Scripted { delay: Duration::from_millis(fixture.delay_ms), replies }
    }

    /// Sends one prompt, retrying transient failures per the backend's policy.
    pub async fn complete(&self, req: &Request<'_>) -> Result<Reply, BackendError> {
        match self {
            Backend::PerfectOracle => {
                let text = format!("Answer: {}", req.truth);
                Ok(Reply {
                    input_tokens: Some(approx_tokens(req.prompt)),
                    output_tokens: Some(approx_tokens(&text)),
                    text,
                    token_logprobs: None,
                })
            }
            Backend::Scripted { delay, replies } => {
                if !delay.is_zero() {
                    tokio::time::sleep(*delay).await;
                }
                let id = req.instance_id.to_string();
                let keys = [
                    (id.clone(), Some(req.rendering), Some(req.style)),
                    (id.clone(), Some(req.rendering), None),
                    (id.clone(), None, Some(req.style)),
                    (id.clone(), None, None),
                ];
                let e = keys
                    .iter()
                    .find_map(|k| replies.get(k))
                    .ok_or_else(|| BackendError::FixtureMissing(format!("{id} {} {}", req.rendering, req.style)))?;
                Ok(Reply {
                    text: e.response.clone(),
                    input_tokens: e.input_tokens.or(Some(approx_tokens(req.prompt))),
                    output_tokens: e.output_tokens.or(Some(approx_tokens(&e.response))),
                    token_logprobs: e.token_logprobs.clone(),
                })
            }
            Backend::Http { client, spec, token } => {
                let BackendSpec::HttpChat { retry, .. } = spec else { unreachable!() };
                let mut attempt = 1;
                loop {
                    match http_once(client, spec, token.as_deref(), req.prompt).await {
                        Err(BackendError::Transient(msg)) if attempt < retry.max_attempts => {
                            tracing::warn!(attempt, instance = req.instance_id, "retrying: {msg}");
                            tokio::time::sleep(retry.delay(attempt)).await;
                            attempt += 1;
                        }
                        other => return other,
                    }
                }
            }
        }
    }
}

async fn http_once(
    client: &reqwest::Client,
    spec: &BackendSpec,
    token: Option<&str>,
    prompt: &str,
) -> Result<Reply, BackendError> {
    let BackendSpec::HttpChat { endpoint, model, temperature, max_tokens, presence_penalty, logprobs, .. } = spec else {
        unreachable!()
    };
    let mut body = json!({
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": temperature,
        "max_tokens": max_tokens,
        "presence_penalty": presence_penalty,
    });
    if *logprobs {
        body["logprobs"] = json!(true);
    }
    let mut rb = client.post(endpoint).json(&body);
    if let Some(t) = token {
        rb = rb.bearer_auth(t);
    }
    let resp = rb.send().await.map_err(|e| {
        if e.is_timeout() || e.is_connect() || e.is_request() {
            BackendError::Transient(e.to_string())
        } else {
            BackendError::Fatal(e.to_string())
        }
    })?;
    let status = resp.status();
    if status.as_u16() == 429 || status.is_server_error() {
        return Err(BackendError::Transient(format!("status {status}")));
    }
    if !status.is_success() {
        let text = resp.text().await.unwrap_or_default();
        return Err(BackendError::Fatal(format!("status {status}: {text}")));
    }
    let v: Value = resp.json().await.map_err(|e| BackendError::Transient(e.to_string()))?;
    parse_chat_response(&v)
}

/// Reads text, usage and log-likelihoods from a chat-completions body.
pub fn parse_chat_response(v: &Value) -> Result<Reply, BackendError> {
    let choice = &v["choices"][0];
    let text = choice["message"]["content"]
        .as_str()
        .ok_or_else(|| BackendError::Fatal("response has no message content".into()))?
        .to_string();
    let token_logprobs = choice["logprobs"]["content"]
        .as_array()
        .map(|items| items.iter().filter_map(|t| t["logprob"].as_f64()).collect());
    Ok(Reply {
        text,
        input_tokens: v["usage"]["prompt_tokens"].as_u64(),
        output_tokens: v["usage"]["completion_tokens"].as_u64(),
        token_logprobs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chat_body_parsing() {
        let v = json!({
            "choices": [{"message": {"role": "assistant", "content": "Answer: 3"},
                         "logprobs": {"content": [{"token": "Answer", "logprob": -0.5}, {"token": "3", "logprob": -1.25}]}}],
            "usage": {"prompt_tokens": 12, "completion_tokens": 3}
        });
        let r = parse_chat_response(&v).unwrap();
        assert_eq!(r.text, "Answer: 3");
        assert_eq!((r.input_tokens, r.output_tokens), (Some(12), Some(3)));
        assert_eq!(r.token_logprobs, Some(vec![-0.5, -1.25]));
        assert!(parse_chat_response(&json!({"choices": []})).is_err());
    }

    #[test]
    fn backoff_grows_and_is_capped() {
        let p = RetryPolicy { max_attempts: 5, base_delay_ms: 100, max_delay_ms: 1000 };
        for attempt in 1..=6 {
            let full = (100u64 << attempt).min(1000);
            let d = p.delay(attempt).as_millis() as u64;
            assert!((full / 2..=full).contains(&d), "{attempt} {d}");
        }
    }

    #[test]
    fn token_approximation() {
        assert_eq!(approx_tokens("a0 += 3"), 4);
        assert_eq!(approx_tokens(""), 0);
    }
}

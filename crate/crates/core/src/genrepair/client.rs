//! Chat-model clients: HTTP, scripted stub and recorded replay.

use super::prompts::PromptBundle;
use super::GenError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;
#[cfg(feature = "http")]
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Base URL of an OpenAI-compatible chat API.
    pub endpoint: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    /// Minimum spacing between requests, in milliseconds.
    pub min_interval_ms: u64,
    pub request_timeout_secs: u64,
    /// Passed through verbatim in the request body.
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            model: "gpt-4o".to_string(),
            temperature: 0.7,
            max_tokens: 2048,
            endpoint: "https://api.openai.com/v1".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
            min_interval_ms: 0,
            request_timeout_secs: 120,
            extra: Default::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        if !(self.temperature >= 0.0) {
            return Err(GenError::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if self.max_tokens == 0 {
            return Err(GenError::Config("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Rough token count for backends that do not report usage.
pub fn estimate_tokens(text: &str) -> u64 {
    text.chars().count().div_ceil(4) as u64
}

impl ModelResponse {
    pub fn estimated(prompt: &PromptBundle, text: impl Into<String>) -> Self {
        let text = text.into();
        ModelResponse {
            prompt_tokens: estimate_tokens(&prompt.system) + estimate_tokens(&prompt.user),
            completion_tokens: estimate_tokens(&text),
            text,
        }
    }
}

pub trait ModelClient: Send + Sync {
    fn complete(&self, prompt: &PromptBundle, config: &ModelConfig) -> Result<ModelResponse, GenError>;
}

/// Key of a prompt in replay stores.
pub fn prompt_hash(prompt: &PromptBundle) -> String {
    let mut h = Sha256::new();
    h.update(prompt.system.as_bytes());
    h.update([0u8]);
    h.update(prompt.user.as_bytes());
    hex::encode(h.finalize())
}

/// Per-record scripted responses, handed out in call order. When a script
/// runs out its last response repeats.
#[derive(Debug, Default)]
pub struct ScriptedClient {
    scripts: HashMap<String, Vec<String>>,
    fallback: Option<String>,
    calls: Mutex<HashMap<String, usize>>,
}

impl ScriptedClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn script(mut self, record_id: impl Into<String>, responses: Vec<String>) -> Self {
        self.scripts.insert(record_id.into(), responses);
        self
    }

    pub fn fallback(mut self, response: impl Into<String>) -> Self {
        self.fallback = Some(response.into());
        self
    }

    /// Scripts from a JSON object `{record_id: [response, ...]}`.
    pub fn from_json(text: &str) -> Result<Self, GenError> {
        let scripts: HashMap<String, Vec<String>> =
            serde_json::from_str(text).map_err(|e| GenError::Config(format!("script: {e}")))?;
        Ok(ScriptedClient { scripts, ..Default::default() })
    }

    pub fn calls(&self, record_id: &str) -> usize {
        self.calls.lock().unwrap().get(record_id).copied().unwrap_or(0)
    }
}

impl ModelClient for ScriptedClient {
    fn complete(&self, prompt: &PromptBundle, _: &ModelConfig) -> Result<ModelResponse, GenError> {
        let k = {
            let mut calls = self.calls.lock().unwrap();
            let k = calls.entry(prompt.record_id.clone()).or_default();
            *k += 1;
            *k - 1
        };
        let text = match self.scripts.get(&prompt.record_id) {
            Some(s) if !s.is_empty() => s[k.min(s.len() - 1)].clone(),
            _ => self.fallback.clone().ok_or_else(|| GenError::Model(format!("no script for `{}`", prompt.record_id)))?,
        };
        Ok(ModelResponse::estimated(prompt, text))
    }
}

/// Responses recorded by prompt hash.
#[derive(Debug, Default, Clone)]
pub struct ReplayClient {
    responses: HashMap<String, ModelResponse>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReplayLine {
    prompt_hash: String,
    #[serde(flatten)]
    response: ModelResponse,
}

impl ReplayClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, prompt: &PromptBundle, response: ModelResponse) {
        self.responses.insert(prompt_hash(prompt), response);
    }

    /// Reads `{prompt_hash, text, prompt_tokens, completion_tokens}` lines.
    pub fn load(path: &Path) -> Result<Self, GenError> {
        let mut responses = HashMap::new();
        for (i, line) in std::fs::read_to_string(path)?.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let l: ReplayLine =
                serde_json::from_str(line).map_err(|e| GenError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
            responses.insert(l.prompt_hash, l.response);
        }
        Ok(ReplayClient { responses })
    }

    pub fn save(&self, path: &Path) -> Result<(), GenError> {
        let mut keys: Vec<&String> = self.responses.keys().collect();
        keys.sort();
        let mut out = String::new();
        for k in keys {
            let line = ReplayLine { prompt_hash: k.clone(), response: self.responses[k].clone() };
            out.push_str(&serde_json::to_string(&line).expect("replay line serializes"));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

impl ModelClient for ReplayClient {
    fn complete(&self, prompt: &PromptBundle, _: &ModelConfig) -> Result<ModelResponse, GenError> {
        let h = prompt_hash(prompt);
        self.responses.get(&h).cloned().ok_or_else(|| GenError::Model(format!("no recorded response for prompt {h}")))
    }
}

/// OpenAI-compatible `/chat/completions` client. The key is read from the
/// configured environment variable on each call.
#[cfg(feature = "http")]
pub struct HttpClient {
    agent: ureq::Agent,
    last: Mutex<Option<Instant>>,
}

#[cfg(feature = "http")]
impl HttpClient {
    pub fn new(config: &ModelConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.request_timeout_secs)))
            .build()
            .into();
        HttpClient { agent, last: Mutex::new(None) }
    }

    fn pace(&self, min_interval: Duration) {
        let mut last = self.last.lock().unwrap();
        if let Some(t) = *last {
            let since = t.elapsed();
            if since < min_interval {
                std::thread::sleep(min_interval - since);
            }
        }
        *last = Some(Instant::now());
    }
}

#[cfg(feature = "http")]
impl ModelClient for HttpClient {
    fn complete(&self, prompt: &PromptBundle, config: &ModelConfig) -> Result<ModelResponse, GenError> {
        config.validate()?;
        let key = std::env::var(&config.api_key_env)
            .map_err(|_| GenError::Config(format!("environment variable {} is not set", config.api_key_env)))?;
        let mut body = serde_json::json!({
            "model": config.model,
            "temperature": config.temperature,
            "max_tokens": config.max_tokens,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
        });
        for (k, v) in &config.extra {
            body[k] = v.clone();
        }
        self.pace(Duration::from_millis(config.min_interval_ms));
        let url = format!("{}/chat/completions", config.endpoint.trim_end_matches('/'));
        let mut resp = self
            .agent
            .post(&url)
            .header("Authorization", &format!("Bearer {key}"))
            .send_json(&body)
            .map_err(|e| GenError::Model(e.to_string()))?;
        let v: serde_json::Value = resp.body_mut().read_json().map_err(|e| GenError::Model(e.to_string()))?;
        let text = v["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| GenError::Model("response has no message content".into()))?
            .to_string();
        let usage = |k: &str| v["usage"][k].as_u64();
        Ok(ModelResponse {
            prompt_tokens: usage("prompt_tokens").unwrap_or_else(|| estimate_tokens(&prompt.system) + estimate_tokens(&prompt.user)),
            completion_tokens: usage("completion_tokens").unwrap_or_else(|| estimate_tokens(&text)),
            text,
        })
    }
}

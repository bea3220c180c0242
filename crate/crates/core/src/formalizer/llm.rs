use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::envs::Belief;
use crate::http;

use super::parse::{parse_output, FormalizerOutput};
use super::prompt::{build_prompt, PromptContext};
use super::{expected_output, Formalizer, FormalizerError};

pub const API_KEY_ENV: &str = "PDDLEGO_API_KEY";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    /// Base URL; "/chat/completions" is appended.
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    /// Extra attempts after an answer that cannot be parsed.
    pub max_format_retries: usize,
    /// Extra attempts after a network failure or 5xx status.
    pub max_transport_retries: usize,
    /// Passed through untouched when set.
    pub reasoning_effort: Option<String>,
    pub api_key_env: String,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            base_url: "http://localhost:8000/v1".to_string(),
            model: "gpt-4.1".to_string(),
            temperature: 0.0,
            timeout_secs: 120,
            max_format_retries: 2,
            max_transport_retries: 2,
            reasoning_effort: None,
            api_key_env: API_KEY_ENV.to_string(),
        }
    }
}

/// Chat-completion client: one user message per call.
pub struct LlmFormalizer {
    config: LlmConfig,
    agent: ureq::Agent,
    pub calls: usize,
}

/// The reply text: `choices[0].message.content` when present, otherwise the
/// first string found under a "content" or "text" key.
pub fn extract_reply_text(body: &Value) -> Option<String> {
    if let Some(s) = body.pointer("/choices/0/message/content").and_then(Value::as_str) {
        return Some(s.to_string());
    }
    fn walk(v: &Value) -> Option<String> {
        match v {
            Value::Object(map) => {
                for key in ["content", "text"] {
                    if let Some(Value::String(s)) = map.get(key) {
                        return Some(s.clone());
                    }
                }
                map.values().find_map(walk)
            }
            Value::Array(items) => items.iter().find_map(walk),
            _ => None,
        }
    }
    walk(body)
}

impl LlmFormalizer {
    pub fn new(config: LlmConfig) -> Self {
        let agent = http::agent(Duration::from_secs(config.timeout_secs.max(1)));
        LlmFormalizer { config, agent, calls: 0 }
    }

    fn request_body(&self, prompt: &str) -> Value {
        let mut body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        });
        if let Some(effort) = &self.config.reasoning_effort {
            body["reasoning_effort"] = json!(effort);
        }
        body
    }

    /// Sends the prompt and returns the reply text, retrying transport failures.
    pub fn complete(&mut self, prompt: &str) -> Result<String, FormalizerError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let mut headers = Vec::new();
        if let Ok(key) = std::env::var(&self.config.api_key_env) {
            headers.push(("Authorization", format!("Bearer {key}")));
        }
        let body = self.request_body(prompt);
        let mut last = String::new();
        for _ in 0..=self.config.max_transport_retries {
            self.calls += 1;
            match http::post_json(&self.agent, &url, &headers, &body) {
                Ok((status, text)) if (200..300).contains(&status) => {
                    let value: Value = serde_json::from_str(&text).map_err(|e| {
                        FormalizerError::Transport(format!("response body is not JSON: {e}"))
                    })?;
                    return extract_reply_text(&value).ok_or_else(|| {
                        FormalizerError::Transport("response carries no message text".to_string())
                    });
                }
                Ok((status, text)) if status >= 500 => {
                    last = format!("server returned {status}: {}", text.chars().take(200).collect::<String>());
                }
                Ok((status, text)) => {
                    return Err(FormalizerError::Transport(format!(
                        "server returned {status}: {}",
                        text.chars().take(200).collect::<String>()
                    )))
                }
                Err(e) => last = e.message,
            }
        }
        Err(FormalizerError::Transport(last))
    }
}

impl Formalizer for LlmFormalizer {
    fn formalize(&mut self, ctx: &PromptContext, _belief: &Belief) -> Result<FormalizerOutput, FormalizerError> {
        let prompt = build_prompt(ctx);
        let expected = expected_output(ctx);
        let mut last = String::new();
        for _ in 0..=self.config.max_format_retries {
            let reply = self.complete(&prompt)?;
            match parse_output(&reply, expected) {
                Ok(out) => return Ok(out),
                Err(e) => last = e.0,
            }
        }
        Err(FormalizerError::Format(last))
    }
}

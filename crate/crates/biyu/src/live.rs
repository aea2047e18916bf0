//! Optional live HTTP transport (build with `--features live`).
//!
//! Speaks the common chat-completions wire shape: POST to
//! `$BIYU_API_URL` with bearer `$BIYU_API_KEY`, one user message per
//! prompt, temperature and max_tokens from the request. Responses are
//! recorded into the cache by the gateway, so a live run leaves behind
//! everything replay needs.

use biyu_core::gateway::{LLMRequest, Transport, TransportError};

pub const API_URL_VAR: &str = "BIYU_API_URL";
pub const API_KEY_VAR: &str = "BIYU_API_KEY";
pub const MODEL_VAR: &str = "BIYU_MODEL";

pub struct HttpTransport {
    url: String,
    key: String,
    model: String,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    /// Builds a transport from the environment; errors if the URL or
    /// key are missing.
    pub fn from_env() -> Result<HttpTransport, TransportError> {
        let url = std::env::var(API_URL_VAR).map_err(|_| TransportError {
            detail: format!("{API_URL_VAR} is not set"),
        })?;
        let key = std::env::var(API_KEY_VAR).map_err(|_| TransportError {
            detail: format!("{API_KEY_VAR} is not set"),
        })?;
        let model = std::env::var(MODEL_VAR).unwrap_or_else(|_| "gpt-4".to_string());
        Ok(HttpTransport {
            url,
            key,
            model,
            client: reqwest::blocking::Client::new(),
        })
    }

    fn body(&self, prompt: &str, request: &LLMRequest) -> serde_json::Value {
        serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            // The canonical temperature is rational; the wire format
            // wants a float. Standard operation is exactly 0.
            "temperature": if request.temperature.is_zero() { 0.0 } else { 1.0 },
            "max_tokens": request.max_tokens,
        })
    }
}

impl Transport for HttpTransport {
    fn send(&self, prompt: &str, request: &LLMRequest) -> Result<String, TransportError> {
        let response = self
            .client
            .post(&self.url)
            .bearer_auth(&self.key)
            .json(&self.body(prompt, request))
            .send()
            .map_err(|e| TransportError {
                detail: e.to_string(),
            })?;
        if !response.status().is_success() {
            return Err(TransportError {
                detail: format!("HTTP {}", response.status()),
            });
        }
        let value: serde_json::Value = response.json().map_err(|e| TransportError {
            detail: e.to_string(),
        })?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(String::from)
            .ok_or_else(|| TransportError {
                detail: "response carries no message content".to_string(),
            })
    }
}

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::GatewayError;

/// Where and how to reach one model. Holds the name of the environment
/// variable carrying the API key, never the key itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_id: String,
    pub api_key_env: String,
    /// Per-request timeout in seconds.
    pub timeout: f64,
    pub max_retries: u32,
    /// First retry delay in seconds; doubles per retry.
    pub backoff_base: f64,
}

impl EndpointConfig {
    pub fn new(base_url: &str, model_id: &str, api_key_env: &str) -> Self {
        Self {
            base_url: base_url.to_string(),
            model_id: model_id.to_string(),
            api_key_env: api_key_env.to_string(),
            timeout: 120.0,
            max_retries: 3,
            backoff_base: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            return Err(GatewayError::Config(format!("timeout must be positive, got {}", self.timeout)));
        }
        if !(self.backoff_base.is_finite() && self.backoff_base >= 0.0) {
            return Err(GatewayError::Config(format!(
                "backoff_base must be non-negative, got {}",
                self.backoff_base
            )));
        }
        if self.model_id.is_empty() {
            return Err(GatewayError::Config("model_id is empty".into()));
        }
        if self.api_key_env.is_empty() {
            return Err(GatewayError::Config("api_key_env is empty".into()));
        }
        Ok(())
    }

    pub fn completions_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }

    pub fn timeout_duration(&self) -> Duration {
        Duration::from_secs_f64(self.timeout)
    }

    pub fn read_api_key(&self) -> Result<String, GatewayError> {
        match std::env::var(&self.api_key_env) {
            Ok(k) if !k.is_empty() => Ok(k),
            _ => Err(GatewayError::Config(format!(
                "environment variable {} is not set",
                self.api_key_env
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_joins_without_double_slash() {
        let e = EndpointConfig::new("https://example.test/api/v1/", "m", "K");
        assert_eq!(e.completions_url(), "https://example.test/api/v1/chat/completions");
    }

    #[test]
    fn rejects_bad_timeout() {
        let mut e = EndpointConfig::new("http://x", "m", "K");
        e.timeout = 0.0;
        assert!(e.validate().is_err());
    }
}

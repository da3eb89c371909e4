use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::endpoint::EndpointConfig;
use crate::request::{build_request, request_digest, ChatRequest, GenerationOptions};
use crate::runlog::RunLogEntry;
use crate::transport::{backoff_delay, HttpRequest, Transport};
use crate::GatewayError;

/// Instruction texts sent with each call. Edits change the recorded version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompts {
    pub ocr: String,
    /// Must contain `{candidate_position}`, `{first}` and `{second}`.
    pub judge: String,
}

impl Default for Prompts {
    fn default() -> Self {
        Self {
            ocr: include_str!("../assets/ocr_prompt.txt").trim_end().to_string(),
            judge: include_str!("../assets/judge_prompt.txt").trim_end().to_string(),
        }
    }
}

fn short_digest(text: &str) -> String {
    format!("sha256:{}", &request_digest(text.as_bytes())[..12])
}

impl Prompts {
    pub fn ocr_version(&self) -> String {
        short_digest(&self.ocr)
    }

    pub fn judge_version(&self) -> String {
        short_digest(&self.judge)
    }

    fn judge_text(&self, candidate_position: u8, first: &str, second: &str) -> String {
        self.judge
            .replace("{candidate_position}", &candidate_position.to_string())
            .replace("{first}", first)
            .replace("{second}", second)
    }
}

type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

/// A configured endpoint plus the transport used to reach it.
#[derive(Clone)]
pub struct Gateway {
    endpoint: EndpointConfig,
    transport: Arc<dyn Transport>,
    api_key: String,
    options: GenerationOptions,
    prompts: Prompts,
    sleeper: Sleeper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcription {
    /// Response text after fence stripping.
    pub text: String,
    pub log: RunLogEntry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JudgeScore {
    /// Mean of the two directional scores.
    pub score: f64,
    /// Score with the candidate shown first.
    pub forward: f64,
    /// Score with the candidate shown second.
    pub backward: f64,
    pub logs: [RunLogEntry; 2],
}

struct Completion {
    text: String,
    attempts: u32,
    latency_ms: u64,
    digest: String,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<serde_json::Value>,
}

fn response_text(body: &[u8]) -> Result<String, GatewayError> {
    let parsed: ChatResponse =
        serde_json::from_slice(body).map_err(|e| GatewayError::Response(e.to_string()))?;
    let content = parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| GatewayError::Response("no message content".into()))?;
    match content {
        serde_json::Value::String(s) => Ok(s),
        // Some endpoints answer with a list of typed parts.
        serde_json::Value::Array(parts) => Ok(parts
            .iter()
            .filter_map(|p| p.get("text").and_then(|t| t.as_str()))
            .collect()),
        other => Err(GatewayError::Response(format!("unexpected content {other}"))),
    }
}

impl Gateway {
    /// Reads the API key from the endpoint's environment variable.
    pub fn new(endpoint: EndpointConfig, transport: Arc<dyn Transport>) -> Result<Self, GatewayError> {
        let api_key = endpoint.read_api_key()?;
        Self::with_api_key(endpoint, transport, api_key)
    }

    /// Uses `api_key` instead of reading the environment; meant for offline
    /// transports that ignore it.
    pub fn with_api_key(
        endpoint: EndpointConfig,
        transport: Arc<dyn Transport>,
        api_key: String,
    ) -> Result<Self, GatewayError> {
        endpoint.validate()?;
        Ok(Self {
            endpoint,
            transport,
            api_key,
            options: GenerationOptions::default(),
            prompts: Prompts::default(),
            sleeper: Arc::new(std::thread::sleep),
        })
    }

    pub fn with_options(mut self, options: GenerationOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_prompts(mut self, prompts: Prompts) -> Self {
        self.prompts = prompts;
        self
    }

    /// Replaces the function used to wait between retries.
    pub fn with_sleeper(mut self, sleeper: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleeper = Arc::new(sleeper);
        self
    }

    pub fn endpoint(&self) -> &EndpointConfig {
        &self.endpoint
    }

    pub fn prompts(&self) -> &Prompts {
        &self.prompts
    }

    fn send(&self, request: &ChatRequest) -> Result<Completion, GatewayError> {
        let body = request.to_json();
        let digest = request_digest(&body);
        let http = HttpRequest {
            url: self.endpoint.completions_url(),
            headers: vec![
                ("Authorization".into(), format!("Bearer {}", self.api_key)),
                ("Content-Type".into(), "application/json".into()),
            ],
            body,
            timeout: self.endpoint.timeout_duration(),
        };
        let max_attempts = self.endpoint.max_retries + 1;
        let mut last_status = None;
        let mut last_message = String::new();
        for attempt in 1..=max_attempts {
            if attempt > 1 {
                (self.sleeper)(backoff_delay(self.endpoint.backoff_base, attempt - 1));
            }
            let start = Instant::now();
            match self.transport.post(&http) {
                Ok(resp) if resp.is_success() => {
                    return Ok(Completion {
                        text: response_text(&resp.body)?,
                        attempts: attempt,
                        latency_ms: start.elapsed().as_millis() as u64,
                        digest,
                    });
                }
                Ok(resp) => {
                    last_status = Some(resp.status);
                    last_message = String::from_utf8_lossy(&resp.body).into_owned();
                    if !resp.is_retryable() {
                        return Err(GatewayError::Transport {
                            status: last_status,
                            attempts: attempt,
                            message: last_message,
                        });
                    }
                }
                Err(failure) => last_message = failure.0,
            }
        }
        Err(GatewayError::Transport {
            status: last_status,
            attempts: max_attempts,
            message: last_message,
        })
    }

    fn log_entry(&self, sample_id: &str, run_index: u32, c: &Completion, prompt_version: String) -> RunLogEntry {
        RunLogEntry {
            sample_id: sample_id.to_string(),
            run_index,
            request_digest: c.digest.clone(),
            response_text: c.text.clone(),
            latency_ms: c.latency_ms,
            attempts: c.attempts,
            prompt_version,
            model_id: self.endpoint.model_id.clone(),
        }
    }

    /// Sends the OCR instruction with the page images and returns the model's
    /// text with a single wrapping code fence removed.
    pub fn transcribe_images(
        &self,
        sample_id: &str,
        run_index: u32,
        images: &[Vec<u8>],
    ) -> Result<Transcription, GatewayError> {
        let request = build_request(&self.endpoint.model_id, &self.prompts.ocr, images, &self.options)?;
        let completion = self.send(&request)?;
        Ok(Transcription {
            text: strip_code_fence(&completion.text).to_string(),
            log: self.log_entry(sample_id, run_index, &completion, self.prompts.ocr_version()),
        })
    }

    /// Judges `generated` against `reference` twice, once in each position,
    /// and averages the two scores.
    pub fn comp_score(&self, sample_id: &str, generated: &str, reference: &str) -> Result<JudgeScore, GatewayError> {
        let version = self.prompts.judge_version();
        let mut scores = [0.0; 2];
        let mut logs = Vec::with_capacity(2);
        for (i, (pos, first, second)) in [(1u8, generated, reference), (2u8, reference, generated)]
            .into_iter()
            .enumerate()
        {
            let text = self.prompts.judge_text(pos, first, second);
            let request = build_request(&self.endpoint.model_id, &text, &[], &self.options)?;
            let completion = self.send(&request)?;
            scores[i] = parse_judge_score(&completion.text)?;
            logs.push(self.log_entry(sample_id, i as u32, &completion, version.clone()));
        }
        let logs: [RunLogEntry; 2] = logs.try_into().expect("two judge calls");
        Ok(JudgeScore {
            score: (scores[0] + scores[1]) / 2.0,
            forward: scores[0],
            backward: scores[1],
            logs,
        })
    }
}

/// Removes one code fence wrapping the whole text (```` ```lang\n...\n``` ````).
/// Anything else is returned unchanged.
pub fn strip_code_fence(text: &str) -> &str {
    let trimmed = text.trim();
    if !(trimmed.starts_with("```") && trimmed.ends_with("```") && trimmed.len() >= 6) {
        return text;
    }
    let Some(open_end) = trimmed.find('\n') else {
        return text;
    };
    let inner = &trimmed[open_end + 1..trimmed.len() - 3];
    if inner.contains("\n```") && !inner.ends_with("\n```") {
        // More than one fenced block: leave it alone.
        return text;
    }
    inner.strip_suffix('\n').unwrap_or(inner)
}

/// First decimal number in the judge's answer, which must lie in [0, 100].
pub fn parse_judge_score(raw: &str) -> Result<f64, GatewayError> {
    let err = || GatewayError::JudgeFormat { raw: raw.to_string() };
    let bytes = raw.as_bytes();
    let start = bytes.iter().position(u8::is_ascii_digit).ok_or_else(err)?;
    let mut end = start;
    let mut seen_dot = false;
    while end < bytes.len() {
        let b = bytes[end];
        if b.is_ascii_digit() {
            end += 1;
        } else if b == b'.' && !seen_dot && bytes.get(end + 1).is_some_and(u8::is_ascii_digit) {
            seen_dot = true;
            end += 1;
        } else {
            break;
        }
    }
    let value: f64 = raw[start..end].parse().map_err(|_| err())?;
    if (0.0..=100.0).contains(&value) {
        Ok(value)
    } else {
        Err(err())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fence_variants() {
        assert_eq!(strip_code_fence("```python\nx = 1\n```"), "x = 1");
        assert_eq!(strip_code_fence("```\na\nb\n```\n"), "a\nb");
        assert_eq!(strip_code_fence("x = 1"), "x = 1");
        assert_eq!(strip_code_fence("```a```"), "```a```");
        let two = "```\na\n```\ntext\n```\nb\n```";
        assert_eq!(strip_code_fence(two), two);
    }

    #[test]
    fn judge_parsing() {
        assert_eq!(parse_judge_score("70").unwrap(), 70.0);
        assert_eq!(parse_judge_score(" Score: 62.5\n").unwrap(), 62.5);
        assert!(matches!(
            parse_judge_score("excellent"),
            Err(GatewayError::JudgeFormat { raw }) if raw == "excellent"
        ));
        assert!(parse_judge_score("150").is_err());
    }

    #[test]
    fn prompt_versions_track_content() {
        let a = Prompts::default();
        let mut b = a.clone();
        b.ocr.push('!');
        assert_ne!(a.ocr_version(), b.ocr_version());
        assert_eq!(a.judge_version(), b.judge_version());
    }

    #[test]
    fn judge_prompt_marks_candidate_position() {
        let p = Prompts::default();
        let t = p.judge_text(2, "REF", "GEN");
        assert!(t.contains("Documentation 2") && t.contains("REF") && t.contains("GEN"));
        assert!(!t.contains('{'));
    }
}

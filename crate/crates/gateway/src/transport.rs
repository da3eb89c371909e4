use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

/// Longest wait between two attempts.
pub const MAX_BACKOFF: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    pub fn is_retryable(&self) -> bool {
        self.status == 429 || self.status >= 500
    }
}

/// Connection-level failure (no HTTP status); always retried.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportFailure(pub String);

/// Sends one POST. Implementations must be shareable across threads.
pub trait Transport: Send + Sync {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, TransportFailure>;
}

/// Delay before retry number `retry` (1-based): `base * 2^(retry-1)`, capped.
pub fn backoff_delay(base: f64, retry: u32) -> Duration {
    let secs = base * 2f64.powi(retry.saturating_sub(1).min(62) as i32);
    Duration::from_secs_f64(secs.min(MAX_BACKOFF.as_secs_f64()))
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Result<Self, TransportFailure> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| TransportFailure(e.to_string()))?;
        Ok(Self { client })
    }
}

impl Transport for ReqwestTransport {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, TransportFailure> {
        let mut builder = self
            .client
            .post(&request.url)
            .timeout(request.timeout)
            .body(request.body.clone());
        for (k, v) in &request.headers {
            builder = builder.header(k, v);
        }
        let resp = builder.send().map_err(|e| TransportFailure(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.bytes().map_err(|e| TransportFailure(e.to_string()))?;
        Ok(HttpResponse {
            status,
            body: body.to_vec(),
        })
    }
}

/// One canned outcome of a [`ScriptedTransport`].
#[derive(Debug, Clone)]
pub enum Scripted {
    Reply(HttpResponse),
    Fail(String),
}

impl Scripted {
    /// A 200 response carrying `text` as the assistant message.
    pub fn chat(text: &str) -> Self {
        Scripted::Reply(chat_response(text))
    }

    pub fn status(status: u16) -> Self {
        Scripted::Reply(HttpResponse {
            status,
            body: format!("{{\"error\":\"status {status}\"}}").into_bytes(),
        })
    }
}

pub(crate) fn chat_response(text: &str) -> HttpResponse {
    let body = serde_json::json!({
        "choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]
    });
    HttpResponse {
        status: 200,
        body: serde_json::to_vec(&body).expect("json"),
    }
}

/// Replays a fixed list of outcomes and records every request it sees.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    script: Mutex<VecDeque<Scripted>>,
    seen: Mutex<Vec<HttpRequest>>,
}

impl ScriptedTransport {
    pub fn new(script: impl IntoIterator<Item = Scripted>) -> Self {
        Self {
            script: Mutex::new(script.into_iter().collect()),
            seen: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> usize {
        self.seen.lock().unwrap().len()
    }

    pub fn requests(&self) -> Vec<HttpRequest> {
        self.seen.lock().unwrap().clone()
    }
}

impl Transport for ScriptedTransport {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, TransportFailure> {
        self.seen.lock().unwrap().push(request.clone());
        match self.script.lock().unwrap().pop_front() {
            Some(Scripted::Reply(r)) => Ok(r),
            Some(Scripted::Fail(m)) => Err(TransportFailure(m)),
            None => Err(TransportFailure("script exhausted".into())),
        }
    }
}

/// Answers every request with `f(request_body)` as the assistant text.
pub struct FnTransport<F> {
    f: F,
    calls: AtomicUsize,
}

impl<F> FnTransport<F>
where
    F: Fn(&[u8]) -> String + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self {
            f,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<F> Transport for FnTransport<F>
where
    F: Fn(&[u8]) -> String + Send + Sync,
{
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, TransportFailure> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(chat_response(&(self.f)(&request.body)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_and_caps() {
        assert_eq!(backoff_delay(0.5, 1), Duration::from_millis(500));
        assert_eq!(backoff_delay(0.5, 3), Duration::from_secs(2));
        assert_eq!(backoff_delay(1.0, 40), MAX_BACKOFF);
        assert_eq!(backoff_delay(0.0, 5), Duration::ZERO);
    }

    #[test]
    fn retryable_statuses() {
        let r = |s| HttpResponse { status: s, body: vec![] };
        assert!(r(429).is_retryable() && r(503).is_retryable());
        assert!(!r(400).is_retryable() && !r(200).is_retryable());
    }
}

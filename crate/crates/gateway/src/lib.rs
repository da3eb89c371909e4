//! Client for OpenAI-compatible multimodal chat endpoints: request building,
//! retrying transport, transcription and judge calls, run logs and pricing.

mod client;
mod endpoint;
mod pricing;
mod repeat;
mod request;
mod runlog;
mod transport;

pub use client::{parse_judge_score, strip_code_fence, Gateway, JudgeScore, Prompts, Transcription};
pub use endpoint::EndpointConfig;
pub use pricing::{estimate_cost, CostEstimate, ModelRates, PriceTier, PricingTable};
pub use repeat::{run_repeats, TranscriptionJob};
pub use request::{
    build_request, request_digest, ChatRequest, ContentPart, GenerationOptions, ImageUrl, Message,
    DEFAULT_MAX_IMAGE_BYTES,
};
pub use runlog::{read_run_log, write_run_log, RunLogEntry};
pub use transport::{
    backoff_delay, FnTransport, HttpRequest, HttpResponse, ReqwestTransport, Scripted,
    ScriptedTransport, Transport, TransportFailure, MAX_BACKOFF,
};

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("request needs an instruction or at least one image")]
    EmptyRequest,
    #[error("image {index} is {bytes} bytes, endpoint limit is {limit}")]
    RequestTooLarge { index: usize, bytes: usize, limit: usize },
    #[error("request failed after {attempts} attempt(s) (last status {status:?}): {message}")]
    Transport {
        status: Option<u16>,
        attempts: u32,
        message: String,
    },
    #[error("malformed response: {0}")]
    Response(String),
    #[error("judge output is not a score in [0, 100]: {raw:?}")]
    JudgeFormat { raw: String },
    #[error("run log: {0}")]
    Io(#[from] std::io::Error),
}

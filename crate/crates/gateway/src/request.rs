use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::GatewayError;

/// Per-image size limit applied before sending (20 MB).
pub const DEFAULT_MAX_IMAGE_BYTES: usize = 20 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationOptions {
    /// Unset fields are omitted so the endpoint's defaults apply.
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub max_image_bytes: usize,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self {
            temperature: None,
            max_tokens: None,
            max_image_bytes: DEFAULT_MAX_IMAGE_BYTES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageUrl {
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContentPart {
    Text { text: String },
    ImageUrl { image_url: ImageUrl },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: Vec<ContentPart>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<Message>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl ChatRequest {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("request serializes")
    }
}

/// Hex SHA-256 of the serialized request body.
pub fn request_digest(body: &[u8]) -> String {
    Sha256::digest(body).iter().map(|b| format!("{b:02x}")).collect()
}

/// One user message: the instruction (if any) followed by the images as PNG
/// data URLs, in the given order. Makes no network call.
pub fn build_request(
    model: &str,
    instruction: &str,
    images: &[Vec<u8>],
    options: &GenerationOptions,
) -> Result<ChatRequest, GatewayError> {
    if instruction.is_empty() && images.is_empty() {
        return Err(GatewayError::EmptyRequest);
    }
    if let Some((index, img)) = images
        .iter()
        .enumerate()
        .find(|(_, img)| img.len() > options.max_image_bytes)
    {
        return Err(GatewayError::RequestTooLarge {
            index,
            bytes: img.len(),
            limit: options.max_image_bytes,
        });
    }
    let mut content = Vec::with_capacity(images.len() + 1);
    if !instruction.is_empty() {
        content.push(ContentPart::Text {
            text: instruction.to_string(),
        });
    }
    let b64 = base64::engine::general_purpose::STANDARD;
    for img in images {
        content.push(ContentPart::ImageUrl {
            image_url: ImageUrl {
                url: format!("data:image/png;base64,{}", b64.encode(img)),
            },
        });
    }
    Ok(ChatRequest {
        model: model.to_string(),
        messages: vec![Message {
            role: "user".into(),
            content,
        }],
        temperature: options.temperature,
        max_tokens: options.max_tokens,
    })
}

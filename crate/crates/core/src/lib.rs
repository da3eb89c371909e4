//! Render source code into fixed-budget page images and measure how well
//! the code survives the trip back through OCR.

pub mod budget;
pub mod metrics;
pub mod render;
pub mod resample;
pub mod syntax;
pub mod tokenizer;

pub use budget::{plan_compression, visual_token_count, BudgetError, CompressionPlan, PatchSpec};
pub use render::{
    encode_png, layout_document, rasterize_page, render_document, PageImage, PageLayout,
    RenderConfig, RenderError, RenderManifest, RenderStyle, RenderedDocument,
};
pub use resample::{downsample_bilinear, ResampleError};
pub use tokenizer::{count_text_tokens, Tokenizer, TokenizerSpec};

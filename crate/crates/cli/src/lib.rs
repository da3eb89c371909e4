//! Library side of the `codepix` command: corpus ingestion, job files, the
//! batch pipeline and the render benchmark.

pub mod bench;
pub mod corpus;
pub mod job;
pub mod pipeline;

pub use corpus::{ingest_corpus, CorpusError, CorpusManifest};
pub use job::JobSpec;
pub use pipeline::{run_pipeline, PipelineOutcome, Summary};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::GatewayError;

/// One line of a run log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLogEntry {
    pub sample_id: String,
    pub run_index: u32,
    pub request_digest: String,
    /// Raw model output, before fence stripping.
    pub response_text: String,
    pub latency_ms: u64,
    pub attempts: u32,
    pub prompt_version: String,
    pub model_id: String,
}

/// Writes entries as JSONL ordered by `(sample_id, run_index)`.
pub fn write_run_log(path: &Path, entries: &[RunLogEntry]) -> Result<(), GatewayError> {
    let mut sorted: Vec<&RunLogEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| (&a.sample_id, a.run_index).cmp(&(&b.sample_id, b.run_index)));
    let mut out = BufWriter::new(File::create(path)?);
    for e in sorted {
        serde_json::to_writer(&mut out, e).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_run_log(path: &Path) -> Result<Vec<RunLogEntry>, GatewayError> {
    let mut entries = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        entries.push(serde_json::from_str(&line).map_err(std::io::Error::from)?);
    }
    Ok(entries)
}

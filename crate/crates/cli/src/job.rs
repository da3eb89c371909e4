use std::path::{Path, PathBuf};

use codepix_core::{RenderConfig, RenderStyle, TokenizerSpec};
use codepix_gateway::EndpointConfig;
use serde::{Deserialize, Serialize};

pub const DEFAULT_REPEATS: u32 = 5;

/// Everything a pipeline run needs. Loaded from JSON; unset fields take
/// their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobSpec {
    /// Files or directories. Directories are walked for source files.
    pub inputs: Vec<PathBuf>,
    pub style: RenderStyle,
    pub ratios: Vec<f64>,
    pub patch_size: u32,
    pub tokenizer: TokenizerSpec,
    pub output: PathBuf,
    pub repeats: u32,
    /// Line filter for directory inputs; explicit file inputs are not filtered.
    pub min_lines: Option<usize>,
    pub max_lines: Option<usize>,
    /// Forces one language instead of detecting it from the extension.
    pub language: Option<String>,
    pub render: RenderConfig,
    /// Transcribe and score the compressed pages when set.
    pub transcribe: Option<EndpointConfig>,
    /// File-level parallelism.
    pub jobs: usize,
}

impl Default for JobSpec {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            style: RenderStyle::Plain,
            ratios: vec![1.0, 2.0, 4.0, 8.0],
            patch_size: 14,
            tokenizer: TokenizerSpec::builtin(),
            output: PathBuf::from("codepix-out"),
            repeats: DEFAULT_REPEATS,
            min_lines: None,
            max_lines: None,
            language: None,
            render: RenderConfig::default(),
            transcribe: None,
            jobs: 1,
        }
    }
}

impl JobSpec {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(!self.inputs.is_empty(), "job has no inputs");
        anyhow::ensure!(!self.ratios.is_empty(), "job has no ratios");
        for &k in &self.ratios {
            anyhow::ensure!(k.is_finite() && k >= 1.0, "ratio {k} must be >= 1");
        }
        anyhow::ensure!(self.repeats >= 1, "repeats must be >= 1");
        anyhow::ensure!(self.jobs >= 1, "jobs must be >= 1");
        anyhow::ensure!(
            codepix_core::render::SUPPORTED_PATCH_SIZES.contains(&self.patch_size),
            "patch size {} is not supported (14 or 16)",
            self.patch_size
        );
        if let (Some(lo), Some(hi)) = (self.min_lines, self.max_lines) {
            anyhow::ensure!(lo <= hi, "min_lines {lo} > max_lines {hi}");
        }
        self.render_config().validate()?;
        if let Some(e) = &self.transcribe {
            e.validate()?;
        }
        Ok(())
    }

    /// Render settings with the job's style applied.
    pub fn render_config(&self) -> RenderConfig {
        self.render.clone().with_style(self.style)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_uses_defaults() {
        let job: JobSpec = serde_json::from_str(r#"{"inputs": ["src"], "ratios": [2], "style": "bold"}"#).unwrap();
        assert_eq!(job.repeats, 5);
        assert_eq!(job.patch_size, 14);
        assert_eq!(job.style, RenderStyle::Bold);
        job.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut job = JobSpec {
            inputs: vec!["a.py".into()],
            ..Default::default()
        };
        job.ratios = vec![0.5];
        assert!(job.validate().is_err());
        job.ratios = vec![2.0];
        job.repeats = 0;
        assert!(job.validate().is_err());
        job.repeats = 1;
        job.patch_size = 15;
        assert!(job.validate().is_err());
        assert!(serde_json::from_str::<JobSpec>(r#"{"ratio": 2}"#).is_err());
    }
}

//! Batch pipeline: render every input, plan and compress it at each ratio,
//! optionally transcribe and score, and write all artifacts under one root.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use codepix_core::metrics::{summarize_reports, KeywordWeights, MetricSummary, ReconstructionRecord, ScoredRecord, Scorer};
use codepix_core::{
    downsample_bilinear, encode_png, plan_compression, render_document, CompressionPlan, PageImage, PatchSpec,
    RenderConfig, RenderedDocument, Tokenizer,
};
use codepix_gateway::{
    run_repeats, write_run_log, EndpointConfig, FnTransport, Gateway, ReqwestTransport, TranscriptionJob, Transport,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{detect_language, discover_sources, line_count};
use crate::job::JobSpec;

/// A per-file (or per file and ratio) problem that did not stop the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub path: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    /// Prefix of every artifact name produced for this file.
    pub name: String,
    pub language: String,
    pub line_count: usize,
    pub text_tokens: usize,
    pub pages: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub style: String,
    pub patch_size: u32,
    pub ratios: Vec<f64>,
    pub repeats: u32,
    pub render: RenderConfig,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioTokens {
    pub files: usize,
    pub text_tokens: u64,
    pub achieved_visual_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub files_total: usize,
    pub files_ok: usize,
    pub plans: usize,
    pub total_achieved_visual_tokens: u64,
    pub per_ratio_tokens: BTreeMap<String, RatioTokens>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricSummary>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub output: PathBuf,
    pub manifest: PipelineManifest,
    pub summary: Summary,
}

impl PipelineOutcome {
    pub fn has_failures(&self) -> bool {
        !self.summary.failures.is_empty()
    }
}

/// First 16 hex digits of SHA-256 over the path and the file bytes, so two
/// inputs never share artifact names.
pub fn file_digest(path: &Path, bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(path.to_string_lossy().as_bytes());
    h.update([0]);
    h.update(bytes);
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn ratio_tag(ratio: f64) -> String {
    format!("k{}", codepix_core::metrics::ratio_key(ratio))
}

/// Plans `doc` at `ratio` and resamples each page to its target size.
pub fn compress_document(
    doc: &RenderedDocument,
    text_tokens: u64,
    ratio: f64,
    patch: PatchSpec,
    config: &RenderConfig,
) -> anyhow::Result<(CompressionPlan, Vec<PageImage>)> {
    let aspect = config.base_width as f64 / config.base_height as f64;
    let plan = plan_compression(text_tokens, ratio, patch, doc.pages.len() as u32, aspect)?;
    let pages = doc
        .pages
        .par_iter()
        .zip(&plan.targets)
        .map(|(page, [w, h])| downsample_bilinear(page, *w, *h))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((plan, pages))
}

/// Builds the gateway for `endpoint`. A `mock://` base URL answers offline
/// with a fixed text derived from the request digest and needs no key.
pub fn gateway_for(endpoint: &EndpointConfig) -> anyhow::Result<Gateway> {
    if endpoint.base_url.starts_with("mock://") {
        let transport: Arc<dyn Transport> = Arc::new(FnTransport::new(|body: &[u8]| {
            format!("# offline transcription {}", &codepix_gateway::request_digest(body)[..12])
        }));
        return Ok(Gateway::with_api_key(endpoint.clone(), transport, "offline".into())?);
    }
    let transport: Arc<dyn Transport> =
        Arc::new(ReqwestTransport::new().map_err(|e| anyhow::anyhow!("http client: {}", e.0))?);
    Ok(Gateway::new(endpoint.clone(), transport)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// An input file and whether the job's line filter applies to it.
struct Input {
    path: PathBuf,
    filtered: bool,
}

fn collect_inputs(job: &JobSpec, failures: &mut Vec<Failure>) -> Vec<Input> {
    let mut out: Vec<Input> = Vec::new();
    for input in &job.inputs {
        if input.is_dir() {
            match discover_sources(input) {
                Ok(paths) => out.extend(paths.into_iter().map(|path| Input { path, filtered: true })),
                Err(e) => failures.push(Failure {
                    path: input.clone(),
                    ratio: None,
                    stage: "discover".into(),
                    message: e.to_string(),
                }),
            }
        } else if input.exists() {
            out.push(Input {
                path: input.clone(),
                filtered: false,
            });
        } else {
            failures.push(Failure {
                path: input.clone(),
                ratio: None,
                stage: "read".into(),
                message: "no such file or directory".into(),
            });
        }
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    out.dedup_by(|a, b| a.path == b.path);
    out
}

#[derive(Default)]
struct FileResult {
    entry: Option<ManifestEntry>,
    plans: Vec<CompressionPlan>,
    records: Vec<ScoredRecord>,
    failures: Vec<Failure>,
    filtered_out: bool,
}

struct PipelineContext<'a> {
    job: &'a JobSpec,
    config: RenderConfig,
    tokenizer: Tokenizer,
    patch: PatchSpec,
    gateway: Option<&'a Gateway>,
    root: &'a Path,
}

fn process_file(cx: &PipelineContext, input: &Input) -> FileResult {
    let mut res = FileResult::default();
    let path = &input.path;
    let fail = |ratio: Option<f64>, stage: &str, message: String| Failure {
        path: path.clone(),
        ratio,
        stage: stage.into(),
        message,
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            res.failures.push(fail(None, "read", e.to_string()));
            return res;
        }
    };
    let text = match String::from_utf8(bytes.clone()) {
        Ok(t) => t,
        Err(e) => {
            res.failures.push(fail(None, "read", format!("not UTF-8 text: {e}")));
            return res;
        }
    };
    let lines = line_count(&text);
    if input.filtered {
        let lo = cx.job.min_lines.unwrap_or(0);
        let hi = cx.job.max_lines.unwrap_or(usize::MAX);
        if !(lo..=hi).contains(&lines) {
            res.filtered_out = true;
            return res;
        }
    }
    let language = detect_language(path, cx.job.language.as_deref());
    let text_tokens = cx.tokenizer.count(&text);
    let name = format!("{}-{}", file_digest(path, &bytes), cx.config.style);

    let doc = match render_document(&text, &cx.config, &language) {
        Ok(d) => d,
        Err(e) => {
            res.failures.push(fail(None, "render", e.to_string()));
            return res;
        }
    };
    for (i, page) in doc.pages.iter().enumerate() {
        let out = cx.root.join("pages").join(format!("{name}-base-{i:03}.png"));
        if let Err(e) = encode_png(page).map_err(anyhow::Error::from).and_then(|b| Ok(std::fs::write(&out, b)?)) {
            res.failures.push(fail(None, "write", e.to_string()));
            return res;
        }
    }
    res.entry = Some(ManifestEntry {
        path: path.clone(),
        name: name.clone(),
        language: doc.manifest.language.clone(),
        line_count: lines,
        text_tokens,
        pages: doc.pages.len(),
        warnings: doc.manifest.warnings.clone(),
    });

    let scorer = Scorer {
        tokenizer: cx.tokenizer.clone(),
        weights: KeywordWeights::for_language(&doc.manifest.language),
        ..Scorer::default()
    };
    for &ratio in &cx.job.ratios {
        let stem = format!("{name}-{}", ratio_tag(ratio));
        let result = compress_document(&doc, text_tokens as u64, ratio, cx.patch, &cx.config).and_then(|(plan, pages)| {
            let mut pngs = Vec::with_capacity(pages.len());
            for (i, page) in pages.iter().enumerate() {
                let png = encode_png(page)?;
                std::fs::write(cx.root.join("pages").join(format!("{stem}-{i:03}.png")), &png)?;
                pngs.push(png);
            }
            write_json(&cx.root.join("plans").join(format!("{stem}.json")), &plan)?;
            Ok((plan, pngs))
        });
        let (plan, pngs) = match result {
            Ok(v) => v,
            Err(e) => {
                res.failures.push(fail(Some(ratio), "compress", format!("{e:#}")));
                continue;
            }
        };
        res.plans.push(plan);

        let Some(gateway) = cx.gateway else { continue };
        let sample_id = path.to_string_lossy().into_owned();
        let job = TranscriptionJob {
            sample_id: sample_id.clone(),
            images: pngs,
        };
        let mut logs = Vec::new();
        let mut records = Vec::new();
        for (_, run, outcome) in run_repeats(gateway, std::slice::from_ref(&job), cx.job.repeats, 1) {
            match outcome {
                Ok(t) => {
                    logs.push(t.log);
                    let record = ReconstructionRecord {
                        sample_id: sample_id.clone(),
                        ground_truth: text.clone(),
                        reconstruction: t.text,
                        compression_ratio: ratio,
                        run_index: run,
                    };
                    match scorer.score_record(&record) {
                        Ok(r) => records.push(r),
                        Err(e) => res.failures.push(fail(Some(ratio), "score", e.to_string())),
                    }
                }
                Err(e) => res.failures.push(fail(Some(ratio), "transcribe", format!("run {run}: {e}"))),
            }
        }
        let written = write_run_log(&cx.root.join("runs").join(format!("{stem}.jsonl")), &logs)
            .map_err(anyhow::Error::from)
            .and_then(|_| write_reports(&cx.root.join("reports").join(format!("{stem}.jsonl")), &records));
        if let Err(e) = written {
            res.failures.push(fail(Some(ratio), "write", e.to_string()));
        }
        res.records.extend(records);
    }
    res
}

pub fn write_reports(path: &Path, records: &[ScoredRecord]) -> anyhow::Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Every scored record under `root/reports`, in file-name order.
pub fn read_reports(root: &Path) -> anyhow::Result<Vec<ScoredRecord>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(root.join("reports"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        for line in std::fs::read_to_string(&f)?.lines().filter(|l| !l.trim().is_empty()) {
            out.push(serde_json::from_str(line).with_context(|| format!("parsing {}", f.display()))?);
        }
    }
    Ok(out)
}

/// Runs `job`, writing `manifest.json`, `plans/`, `pages/`, `runs/`,
/// `reports/` and `summary.json` under `job.output`. Transcription happens
/// only when `gateway` is given.
pub fn run_pipeline(job: &JobSpec, gateway: Option<&Gateway>) -> anyhow::Result<PipelineOutcome> {
    job.validate()?;
    let root = job.output.clone();
    let mut dirs = vec!["plans", "pages"];
    if gateway.is_some() {
        dirs.extend(["runs", "reports"]);
    }
    for d in dirs {
        std::fs::create_dir_all(root.join(d)).with_context(|| format!("creating {}", root.join(d).display()))?;
    }
    let cx = PipelineContext {
        job,
        config: job.render_config(),
        tokenizer: job.tokenizer.load()?,
        patch: PatchSpec::new(job.patch_size)?,
        gateway,
        root: &root,
    };
    let mut failures = Vec::new();
    let inputs = collect_inputs(job, &mut failures);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(job.jobs).build()?;
    let results: Vec<FileResult> = pool.install(|| inputs.par_iter().map(|i| process_file(&cx, i)).collect());

    let mut entries = Vec::new();
    let mut plans = Vec::new();
    let mut records = Vec::new();
    let mut considered = 0;
    for r in results {
        if r.filtered_out {
            continue;
        }
        considered += 1;
        failures.extend(r.failures);
        if let Some(e) = r.entry {
            entries.push(e);
        }
        plans.extend(r.plans);
        records.extend(r.records);
    }
    failures.sort_by(|a, b| {
        a.path
            .cmp(&b.path)
            .then(a.ratio.unwrap_or(0.0).total_cmp(&b.ratio.unwrap_or(0.0)))
            .then(a.stage.cmp(&b.stage))
    });
    if considered == 0 && failures.is_empty() {
        anyhow::bail!("no input files matched the job");
    }

    let mut per_ratio_tokens: BTreeMap<String, RatioTokens> = BTreeMap::new();
    for p in &plans {
        let t = per_ratio_tokens.entry(codepix_core::metrics::ratio_key(p.ratio)).or_default();
        t.files += 1;
        t.text_tokens += p.text_tokens;
        t.achieved_visual_tokens += p.achieved_visual_tokens;
    }
    let failed_files: std::collections::BTreeSet<&PathBuf> = failures.iter().map(|f| &f.path).collect();
    let summary = Summary {
        files_total: considered + failures.iter().filter(|f| f.stage == "discover").count(),
        files_ok: entries.iter().filter(|e| !failed_files.contains(&e.path)).count(),
        plans: plans.len(),
        total_achieved_visual_tokens: plans.iter().map(|p| p.achieved_visual_tokens).sum(),
        per_ratio_tokens,
        metrics: if gateway.is_some() && !records.is_empty() {
            Some(summarize_reports(&records)?)
        } else {
            None
        },
        failures,
    };
    let manifest = PipelineManifest {
        style: job.style.to_string(),
        patch_size: job.patch_size,
        ratios: job.ratios.clone(),
        repeats: job.repeats,
        render: cx.config.clone(),
        entries,
    };
    write_json(&root.join("manifest.json"), &manifest)?;
    write_json(&root.join("summary.json"), &summary)?;
    Ok(PipelineOutcome {
        output: root,
        manifest,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_path_and_content() {
        let a = file_digest(Path::new("a.py"), b"x");
        assert_eq!(a.len(), 16);
        assert_ne!(a, file_digest(Path::new("b.py"), b"x"));
        assert_ne!(a, file_digest(Path::new("a.py"), b"y"));
    }

    #[test]
    fn ratio_tags() {
        assert_eq!(ratio_tag(4.0), "k4");
        assert_eq!(ratio_tag(2.5), "k2.5");
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use codepix::bench::bench_render;
use codepix::corpus::{detect_language, discover_sources, ingest_corpus};
use codepix::pipeline::{compress_document, gateway_for, ratio_tag, read_reports, run_pipeline};
use codepix::JobSpec;
use codepix_core::metrics::{summarize_reports, KeywordWeights, Scorer};
use codepix_core::{encode_png, plan_compression, render_document, PatchSpec, RenderConfig, RenderStyle, TokenizerSpec};
use codepix_gateway::{estimate_cost, write_run_log, EndpointConfig, PricingTable};

#[derive(Parser)]
#[command(name = "codepix", version, about = "Render source code as images at a fixed visual-token budget")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TokenizerArgs {
    /// Vocabulary file (one entry per line) instead of the builtin tokenizer.
    #[arg(long)]
    vocab: Option<PathBuf>,
}

impl TokenizerArgs {
    fn spec(&self) -> TokenizerSpec {
        match &self.vocab {
            Some(p) => TokenizerSpec::external(p),
            None => TokenizerSpec::builtin(),
        }
    }
}

#[derive(Args, Clone)]
struct RenderArgs {
    #[arg(long, default_value = "plain")]
    style: RenderStyle,
    /// Language instead of detection by extension.
    #[arg(long)]
    language: Option<String>,
    #[arg(long, default_value_t = 40)]
    font_size: u32,
}

impl RenderArgs {
    fn config(&self) -> RenderConfig {
        RenderConfig {
            font_size: self.font_size,
            ..RenderConfig::default()
        }
        .with_style(self.style)
    }
}

#[derive(Subcommand)]
enum Command {
    /// List source files under a directory that pass the line filter.
    Ingest {
        root: PathBuf,
        #[arg(long, default_value_t = 50)]
        min_lines: usize,
        #[arg(long, default_value_t = 120)]
        max_lines: usize,
        #[arg(long)]
        language: Option<String>,
        #[command(flatten)]
        tokenizer: TokenizerArgs,
        /// Write the manifest here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render files to full-resolution page PNGs, or time rendering with --bench.
    Render {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        render: RenderArgs,
        #[arg(long, default_value = "pages")]
        out: PathBuf,
        /// Report text tokens rendered per second instead of writing PNGs.
        #[arg(long)]
        bench: bool,
        #[command(flatten)]
        tokenizer: TokenizerArgs,
    },
    /// Print the compression plan for a token count or a file.
    Plan {
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        tokens: Option<u64>,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 14)]
        patch: u32,
        #[arg(long, default_value_t = 1)]
        pages: u32,
        #[command(flatten)]
        tokenizer: TokenizerArgs,
    },
    /// Render a file and downsample its pages to the planned size.
    Compress {
        file: PathBuf,
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 14)]
        patch: u32,
        #[command(flatten)]
        render: RenderArgs,
        #[arg(long, default_value = "compressed")]
        out: PathBuf,
        #[command(flatten)]
        tokenizer: TokenizerArgs,
    },
    /// Send page images to an endpoint and print the transcription.
    Transcribe {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Endpoint config JSON (base_url, model_id, api_key_env, ...).
        #[arg(long)]
        endpoint: PathBuf,
        #[arg(long, default_value = "sample")]
        sample_id: String,
        #[arg(long, default_value_t = 0)]
        run_index: u32,
        /// Append the run-log entry to this JSONL file.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Score a reconstruction against its ground truth.
    Score {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        hypothesis: PathBuf,
        #[arg(long)]
        language: Option<String>,
        #[command(flatten)]
        tokenizer: TokenizerArgs,
    },
    /// Recompute the per-ratio summary from an output root's reports.
    Report { root: PathBuf },
    /// Estimate API cost from token counts.
    Cost {
        #[arg(long)]
        input_tokens: u64,
        #[arg(long, default_value_t = 0)]
        output_tokens: u64,
        #[arg(long)]
        model: String,
        /// Pricing JSON instead of the bundled table.
        #[arg(long)]
        pricing: Option<PathBuf>,
    },
    /// Run a whole job file: render, plan, compress, and optionally transcribe and score.
    Run {
        #[arg(long)]
        job: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        repeats: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[arg(long)]
        style: Option<RenderStyle>,
    },
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn expand_inputs(inputs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for i in inputs {
        if i.is_dir() {
            files.extend(discover_sources(i)?);
        } else {
            files.push(i.clone());
        }
    }
    Ok(files)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Ingest {
            root,
            min_lines,
            max_lines,
            language,
            tokenizer,
            out,
        } => {
            let manifest = ingest_corpus(&root, min_lines, max_lines, &tokenizer.spec(), language.as_deref())?;
            match out {
                Some(p) => std::fs::write(&p, serde_json::to_string_pretty(&manifest)? + "\n")?,
                None => print_json(&manifest)?,
            }
        }
        Command::Render {
            inputs,
            render,
            out,
            bench,
            tokenizer,
        } => {
            let files = expand_inputs(&inputs)?;
            if bench {
                let report = bench_render(&files, &render.config(), &tokenizer.spec().load()?, render.language.as_deref())?;
                print_json(&report)?;
                return Ok(true);
            }
            std::fs::create_dir_all(&out)?;
            for f in files {
                let text = std::fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
                let lang = detect_language(&f, render.language.as_deref());
                let doc = render_document(&text, &render.config(), &lang)?;
                for (i, page) in doc.pages.iter().enumerate() {
                    std::fs::write(out.join(format!("{}-{i:03}.png", file_stem(&f))), encode_png(page)?)?;
                }
                for w in &doc.manifest.warnings {
                    eprintln!("{}: {w}", f.display());
                }
            }
        }
        Command::Plan {
            tokens,
            file,
            ratio,
            patch,
            pages,
            tokenizer,
        } => {
            let t = match (tokens, file) {
                (Some(t), _) => t,
                (None, Some(f)) => tokenizer.spec().load()?.count(&std::fs::read_to_string(f)?) as u64,
                (None, None) => unreachable!("clap requires one of --tokens/--file"),
            };
            print_json(&plan_compression(t, ratio, PatchSpec::new(patch)?, pages, 1.0)?)?;
        }
        Command::Compress {
            file,
            ratio,
            patch,
            render,
            out,
            tokenizer,
        } => {
            let text = std::fs::read_to_string(&file)?;
            let tokens = tokenizer.spec().load()?.count(&text) as u64;
            let config = render.config();
            let doc = render_document(&text, &config, &detect_language(&file, render.language.as_deref()))?;
            let (plan, pages) = compress_document(&doc, tokens, ratio, PatchSpec::new(patch)?, &config)?;
            std::fs::create_dir_all(&out)?;
            let stem = format!("{}-{}", file_stem(&file), ratio_tag(ratio));
            for (i, page) in pages.iter().enumerate() {
                std::fs::write(out.join(format!("{stem}-{i:03}.png")), encode_png(page)?)?;
            }
            std::fs::write(out.join(format!("{stem}.json")), serde_json::to_string_pretty(&plan)? + "\n")?;
            print_json(&plan)?;
        }
        Command::Transcribe {
            images,
            endpoint,
            sample_id,
            run_index,
            log,
        } => {
            let endpoint: EndpointConfig = serde_json::from_str(&std::fs::read_to_string(&endpoint)?)?;
            let gateway = gateway_for(&endpoint)?;
            let pngs = images.iter().map(std::fs::read).collect::<Result<Vec<_>, _>>()?;
            let t = gateway.transcribe_images(&sample_id, run_index, &pngs)?;
            if let Some(path) = log {
                let mut entries = if path.exists() {
                    codepix_gateway::read_run_log(&path)?
                } else {
                    Vec::new()
                };
                entries.push(t.log.clone());
                write_run_log(&path, &entries)?;
            }
            println!("{}", t.text);
        }
        Command::Score {
            truth,
            hypothesis,
            language,
            tokenizer,
        } => {
            let lang = detect_language(&truth, language.as_deref());
            let scorer = Scorer {
                tokenizer: tokenizer.spec().load()?,
                weights: KeywordWeights::for_language(&lang),
                ..Scorer::default()
            };
            let report = scorer.score(&std::fs::read_to_string(truth)?, &std::fs::read_to_string(hypothesis)?)?;
            print_json(&report)?;
        }
        Command::Report { root } => {
            print_json(&summarize_reports(&read_reports(&root)?)?)?;
        }
        Command::Cost {
            input_tokens,
            output_tokens,
            model,
            pricing,
        } => {
            let table = match pricing {
                Some(p) => PricingTable::from_json(&std::fs::read_to_string(p)?)?,
                None => PricingTable::bundled(),
            };
            print_json(&estimate_cost(input_tokens, output_tokens, &model, &table)?)?;
        }
        Command::Run {
            job,
            jobs,
            output,
            repeats,
            ratios,
            style,
        } => {
            let mut spec = JobSpec::from_file(&job)?;
            if let Some(j) = jobs {
                spec.jobs = j;
            }
            if let Some(o) = output {
                spec.output = o;
            }
            if let Some(r) = repeats {
                spec.repeats = r;
            }
            if let Some(r) = ratios {
                spec.ratios = r;
            }
            if let Some(s) = style {
                spec.style = s;
            }
            let gateway = spec.transcribe.as_ref().map(gateway_for).transpose()?;
            let outcome = run_pipeline(&spec, gateway.as_ref())?;
            for f in &outcome.summary.failures {
                eprintln!("failed: {} ({}): {}", f.path.display(), f.stage, f.message);
            }
            eprintln!(
                "{} of {} files ok, {} plans, {} visual tokens; artifacts in {}",
                outcome.summary.files_ok,
                outcome.summary.files_total,
                outcome.summary.plans,
                outcome.summary.total_achieved_visual_tokens,
                outcome.output.display()
            );
            return Ok(!outcome.has_failures());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

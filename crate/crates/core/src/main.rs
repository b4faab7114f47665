use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use insightmap::eval::{compare, compare_corpus, satisfied_count, score_output_with, DimensionScore};
use insightmap::model::{render_report, DocumentSource};
use insightmap::pipeline::{AnalyzeRequest, Pipeline, PipelineError};
use insightmap::prompt::{ProfileRegistry, DEFAULT_PROFILE_ID};
use insightmap::service::{self, AnalyzeResponse, ServiceConfig};

#[derive(Parser)]
#[command(name = "insightmap", version, about = "Guided-reading analysis of scientific PDFs")]
struct Cli {
    /// Use the bundled fixture OCR and mock model instead of live providers.
    #[arg(long, global = true)]
    mock: bool,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on one paper.
    Analyze {
        /// File path, http(s) URL, or `example:<id>`.
        source: String,
        #[arg(long, default_value = DEFAULT_PROFILE_ID)]
        profile: String,
        /// Ignore any cached analysis.
        #[arg(long)]
        refresh: bool,
    },
    /// OCR only: print the extracted Markdown.
    Extract { source: String },
    /// Score guided against baseline output on the same paper(s).
    Compare {
        /// Papers to compare; omit with --corpus.
        sources: Vec<String>,
        /// Compare every bundled example.
        #[arg(long)]
        corpus: bool,
        #[arg(long, default_value = DEFAULT_PROFILE_ID)]
        profile: String,
    },
    /// Score a saved model output against a paper.
    Score {
        /// File holding the raw model output.
        output: PathBuf,
        /// The paper the output describes.
        #[arg(long)]
        doc: String,
    },
    /// Reading profiles.
    Profiles {
        #[command(subcommand)]
        command: ProfilesCommand,
    },
    /// Start the HTTP service.
    Serve,
}

#[derive(Subcommand)]
enum ProfilesCommand {
    List,
}

fn parse_source(s: &str) -> Result<DocumentSource> {
    if let Some(id) = s.strip_prefix("example:") {
        return Ok(DocumentSource::BundledExample(id.to_owned()));
    }
    if s.starts_with("http://") || s.starts_with("https://") {
        return Ok(DocumentSource::PublicUrl(s.to_owned()));
    }
    let bytes = std::fs::read(s).with_context(|| format!("reading {s}"))?;
    Ok(DocumentSource::UploadBytes(bytes))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn pipeline_error(e: PipelineError) -> anyhow::Error {
    if let PipelineError::NoRecognizedSections { raw_model_text } = &e {
        eprintln!("--- raw model output ---\n{raw_model_text}\n--- end ---");
    }
    match e.stage() {
        Some(stage) => anyhow!("{e} (stage: {stage})"),
        None => anyhow!(e),
    }
}

fn json<T: serde::Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn score_table(scores: &[DimensionScore]) -> String {
    let mut out = String::from("| Dimension of Analysis | Satisfied | Evidence |\n|---|---|---|\n");
    for s in scores {
        out.push_str(&format!(
            "| {} | {} | {} |\n",
            s.dimension.label(),
            if s.satisfied { "✓" } else { "✗" },
            s.evidence.replace('|', "\\|")
        ));
    }
    out.push_str(&format!("| **Satisfied** | {}/{} | |\n", satisfied_count(scores), scores.len()));
    out
}

async fn run(cli: Cli) -> Result<()> {
    let config = || ServiceConfig::from_env(cli.mock).map_err(anyhow::Error::from);
    let build = || -> Result<Pipeline> { Ok(config()?.build_pipeline()?) };

    match &cli.command {
        Command::Analyze { source, profile, refresh } => {
            let pipeline = build()?;
            let request = AnalyzeRequest {
                source: parse_source(source)?,
                profile_id: profile.clone(),
                force_refresh: *refresh,
            };
            let outcome = pipeline.analyze(&request).await.map_err(pipeline_error)?;
            if !outcome.validation.passed {
                eprintln!("validation deficiencies: {}", outcome.validation.codes().join(", "));
            }
            let text = match cli.format {
                Format::Md => render_report(&outcome.record.report),
                Format::Json => json(&AnalyzeResponse::from(outcome))?,
            };
            emit(&cli.out, &text)
        }
        Command::Extract { source } => {
            let doc = build()?.extract(&parse_source(source)?).await.map_err(pipeline_error)?;
            let text = match cli.format {
                Format::Md => doc.concatenated_text(),
                Format::Json => json(&doc)?,
            };
            emit(&cli.out, &text)
        }
        Command::Compare { sources, corpus, profile } => {
            let pipeline = build()?;
            let profile = pipeline
                .profiles()
                .get(profile)
                .ok_or_else(|| anyhow!("unknown profile {profile:?}"))?
                .clone();
            let ids: Vec<String> = if *corpus {
                if !sources.is_empty() {
                    bail!("give either sources or --corpus, not both");
                }
                pipeline
                    .resolver()
                    .examples()
                    .list()
                    .into_iter()
                    .map(|e| format!("example:{}", e.id))
                    .collect()
            } else if sources.is_empty() {
                bail!("nothing to compare: give a source or --corpus");
            } else {
                sources.clone()
            };
            let mut docs = Vec::with_capacity(ids.len());
            for id in &ids {
                let doc = pipeline
                    .extract(&parse_source(id)?)
                    .await
                    .map_err(pipeline_error)
                    .with_context(|| format!("extracting {id}"))?;
                docs.push((id.clone(), doc));
            }
            if docs.len() == 1 && !*corpus {
                let (_, doc) = &docs[0];
                let cmp = compare(doc, &profile, pipeline.gateway(), pipeline.builder()).await?;
                let text = match cli.format {
                    Format::Md => cmp.to_markdown(),
                    Format::Json => json(&cmp.rows())?,
                };
                return emit(&cli.out, &text);
            }
            let report = compare_corpus(&docs, &profile, pipeline.gateway(), pipeline.builder())
                .await
                .map_err(|(id, e)| anyhow!("{id}: {e}"))?;
            let text = match cli.format {
                Format::Md => report.to_markdown(),
                Format::Json => json(&report)?,
            };
            emit(&cli.out, &text)
        }
        Command::Score { output, doc } => {
            let raw = std::fs::read_to_string(output)
                .with_context(|| format!("reading {}", output.display()))?;
            let pipeline = build()?;
            let doc = pipeline.extract(&parse_source(doc)?).await.map_err(pipeline_error)?;
            let scores = score_output_with(&raw, &doc, pipeline.profiles().aliases());
            let text = match cli.format {
                Format::Md => score_table(&scores),
                Format::Json => json(&scores)?,
            };
            emit(&cli.out, &text)
        }
        Command::Profiles { command: ProfilesCommand::List } => {
            let cfg = config()?;
            let registry = ProfileRegistry::from_path(&cfg.prompt_config_path)?;
            let text = match cli.format {
                Format::Md => registry
                    .profiles()
                    .iter()
                    .map(|p| format!("{}\t{}", p.id, p.display_name))
                    .collect::<Vec<_>>()
                    .join("\n"),
                Format::Json => json(&registry.profiles())?,
            };
            emit(&cli.out, &text)
        }
        Command::Serve => Ok(service::serve(config()?).await?),
    }
}

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    if let Err(e) = run(Cli::parse()).await {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

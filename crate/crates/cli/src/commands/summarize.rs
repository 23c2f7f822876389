//! `mixsum summarize`: one summary per cluster via a classic extractor, a
//! translation pipeline around it, or the trained model.

use super::{load_clusters, make_backend};
use crate::config::AppConfig;
use crate::error::CliError;
use crate::manifest::ManifestLogger;
use crate::BackendChoice;
use mixsum_core::baselines::{
    extract_then_translate, extract_with, translate_then_extract, ExtractorMethod,
};
use mixsum_core::dataset::{SummaryRecord, TranslationBackend};
use mixsum_core::model::SummarizationModel;
use mixsum_core::text::{DocumentCluster, Language};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct(ExtractorMethod),
    TranslateThenExtract(ExtractorMethod),
    ExtractThenTranslate(ExtractorMethod),
    Model,
}

pub fn parse_method(name: &str) -> Result<Method, CliError> {
    if name == "model" {
        return Ok(Method::Model);
    }
    if let Some(rest) = name.strip_prefix("translate-then-") {
        let inner: ExtractorMethod = rest
            .parse()
            .map_err(|_| CliError::Input(format!("unknown method {name:?}")))?;
        return Ok(Method::TranslateThenExtract(inner));
    }
    if let Some(rest) = name.strip_suffix("-then-translate") {
        let inner: ExtractorMethod = rest
            .parse()
            .map_err(|_| CliError::Input(format!("unknown method {name:?}")))?;
        return Ok(Method::ExtractThenTranslate(inner));
    }
    name.parse::<ExtractorMethod>()
        .map(Method::Direct)
        .map_err(|_| CliError::Input(format!("unknown method {name:?}")))
}

pub struct Args<'a> {
    pub input: &'a Path,
    pub output: &'a Path,
    pub method: &'a str,
    pub budget: Option<usize>,
    pub k: Option<usize>,
    pub checkpoint: Option<&'a Path>,
    pub config: Option<&'a Path>,
    pub seed: Option<u64>,
    pub backend: BackendChoice,
}

pub fn run(args: Args<'_>) -> Result<(), CliError> {
    let mut config = AppConfig::from_args(args.config, args.seed).map_err(CliError::Input)?;
    if let Some(k) = args.k {
        if k < 1 {
            return Err(CliError::Input("--k must be at least 1".into()));
        }
        config.model.extractor.k = k;
    }
    let budget = args.budget.unwrap_or(config.summary_budget);
    let method = parse_method(args.method)?;
    let clusters = load_clusters(args.input)?;
    let logger = ManifestLogger::start(
        "summarize",
        serde_json::to_value(&config).unwrap_or(serde_json::Value::Null),
        config.builder.seed,
        &[args.input],
    );

    let records = match method {
        Method::Model => {
            let checkpoint = args.checkpoint.ok_or_else(|| {
                CliError::MissingArtifact("checkpoint required for method \"model\"".into())
            })?;
            if !checkpoint.exists() {
                return Err(CliError::MissingArtifact(format!(
                    "checkpoint {} not found",
                    checkpoint.display()
                )));
            }
            let mut model = SummarizationModel::load(checkpoint)?;
            if let Some(k) = args.k {
                model.config.extractor.k = k;
            }
            summarize_with_model(&model, &clusters)?
        }
        Method::Direct(inner) => clusters
            .iter()
            .map(|c| {
                Ok(SummaryRecord {
                    cluster_id: c.cluster_id.clone(),
                    summary: extract_with(inner, c, budget)?.render(c),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?,
        Method::TranslateThenExtract(inner) => {
            let backend = make_backend(args.backend, &config.builder)?;
            clusters
                .iter()
                .map(|c| {
                    Ok(SummaryRecord {
                        cluster_id: c.cluster_id.clone(),
                        summary: translate_then_extract_text(c, budget, inner, backend.as_ref())?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
        Method::ExtractThenTranslate(inner) => {
            let backend = make_backend(args.backend, &config.builder)?;
            clusters
                .iter()
                .map(|c| {
                    Ok(SummaryRecord {
                        cluster_id: c.cluster_id.clone(),
                        summary: extract_then_translate(c, budget, inner, backend.as_ref())?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
    };

    write_records(args.output, &records)?;
    logger.finish(args.output)?;
    Ok(())
}

fn summarize_with_model(
    model: &SummarizationModel,
    clusters: &[DocumentCluster],
) -> Result<Vec<SummaryRecord>, CliError> {
    clusters
        .iter()
        .map(|c| {
            Ok(SummaryRecord {
                cluster_id: c.cluster_id.clone(),
                summary: model.summarize(c)?,
            })
        })
        .collect()
}

/// Select with the extractor on the sentence-translated cluster, then
/// render the chosen sentences in English. The per-sentence translations
/// are served from the backend cache, so this costs no extra requests.
fn translate_then_extract_text(
    cluster: &DocumentCluster,
    budget: usize,
    method: ExtractorMethod,
    backend: &dyn TranslationBackend,
) -> Result<String, CliError> {
    let summary = translate_then_extract(cluster, budget, method, backend)?;
    let mut parts = Vec::with_capacity(summary.selected.len());
    for &(doc, sent) in &summary.selected {
        let document = &cluster.documents[doc];
        let text = &document.sentences[sent].text;
        if document.language == Language::En {
            parts.push(text.clone());
        } else {
            parts.push(
                backend
                    .translate(text, document.language, Language::En)
                    .map_err(CliError::from)?,
            );
        }
    }
    Ok(parts.join(" "))
}

pub fn write_records(output: &Path, records: &[SummaryRecord]) -> Result<(), CliError> {
    let file = std::fs::File::create(output)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", output.display())))?;
    let mut writer = std::io::BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| CliError::Input(format!("serialize summary: {e}")))?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

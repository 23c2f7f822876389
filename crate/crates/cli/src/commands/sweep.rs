//! `mixsum sweep-k`: run extract+generate at several top-K values and emit
//! one CSV row per K.

use super::evaluate::score_pairs;
use super::load_clusters;
use crate::config::AppConfig;
use crate::error::CliError;
use crate::manifest::ManifestLogger;
use mixsum_core::model::SummarizationModel;
use mixsum_core::text::tokenize;
use std::path::Path;

pub fn parse_k_list(raw: &str) -> Result<Vec<usize>, CliError> {
    let mut values = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let k: usize = part
            .parse()
            .map_err(|_| CliError::Input(format!("invalid K value {part:?}")))?;
        if k < 1 {
            return Err(CliError::Input("K values must be at least 1".into()));
        }
        if values.contains(&k) {
            eprintln!("warning: duplicate K value {k} ignored");
            continue;
        }
        values.push(k);
    }
    if values.is_empty() {
        return Err(CliError::Input("no K values given".into()));
    }
    Ok(values)
}

pub fn run(
    input: &Path,
    output: &Path,
    k_list: &str,
    checkpoint: Option<&Path>,
    config_path: Option<&Path>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let config = AppConfig::from_args(config_path, seed).map_err(CliError::Input)?;
    let ks = parse_k_list(k_list)?;
    let checkpoint = checkpoint.ok_or_else(|| {
        CliError::MissingArtifact("checkpoint required for the top-K sweep".into())
    })?;
    if !checkpoint.exists() {
        return Err(CliError::MissingArtifact(format!(
            "checkpoint {} not found",
            checkpoint.display()
        )));
    }
    let clusters = load_clusters(input)?;
    let mut model = SummarizationModel::load(checkpoint)?;
    let logger = ManifestLogger::start(
        "sweep-k",
        serde_json::to_value(&config).unwrap_or(serde_json::Value::Null),
        config.builder.seed,
        &[input, checkpoint],
    );

    let mut csv = String::from("k,rouge1,rouge2,rougeL\n");
    for &k in &ks {
        model.config.extractor.k = k;
        let mut pairs = Vec::with_capacity(clusters.len());
        for cluster in &clusters {
            let summary = model.summarize(cluster)?;
            pairs.push((tokenize(&summary), cluster.summary.tokens()));
        }
        let report = score_pairs(&pairs);
        csv.push_str(&format!(
            "{k},{:.2},{:.2},{:.2}\n",
            report.rouge1, report.rouge2, report.rouge_l
        ));
    }
    print!("{csv}");
    std::fs::write(output, csv.as_bytes())?;
    logger.finish(output)?;
    Ok(())
}

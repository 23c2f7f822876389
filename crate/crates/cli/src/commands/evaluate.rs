//! `mixsum evaluate`: corpus-mean ROUGE-1/2/L F1 of summaries against the
//! dataset references, reported on the 0-100 scale.

use super::load_clusters;
use crate::error::CliError;
use crate::manifest::ManifestLogger;
use mixsum_core::dataset::format::read_summaries;
use mixsum_core::rouge::{rouge_l, rouge_n};
use mixsum_core::text::tokenize;
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeReport {
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
}

/// Mean per-pair F1 (unweighted over clusters), 0-100.
pub fn score_pairs(pairs: &[(Vec<String>, Vec<String>)]) -> RougeReport {
    let n = pairs.len().max(1) as f64;
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    let mut rl = 0.0;
    for (candidate, reference) in pairs {
        r1 += rouge_n(candidate, reference, 1).expect("n >= 1").f1;
        r2 += rouge_n(candidate, reference, 2).expect("n >= 1").f1;
        rl += rouge_l(candidate, reference).f1;
    }
    RougeReport {
        rouge1: 100.0 * r1 / n,
        rouge2: 100.0 * r2 / n,
        rouge_l: 100.0 * rl / n,
    }
}

pub fn run(
    summaries_path: &Path,
    dataset_path: &Path,
    output: Option<&Path>,
    label: Option<&str>,
) -> Result<(), CliError> {
    let file = std::fs::File::open(summaries_path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", summaries_path.display())))?;
    let summaries = read_summaries(std::io::BufReader::new(file))?;
    let clusters = load_clusters(dataset_path)?;

    if summaries.len() != clusters.len() {
        return Err(CliError::Input(format!(
            "cluster ids do not align: {} summaries vs {} dataset clusters",
            summaries.len(),
            clusters.len()
        )));
    }
    let mut by_id: HashMap<&str, &str> = HashMap::new();
    for record in &summaries {
        if by_id
            .insert(record.cluster_id.as_str(), record.summary.as_str())
            .is_some()
        {
            return Err(CliError::Input(format!(
                "duplicate summary for cluster {:?}",
                record.cluster_id
            )));
        }
    }
    let mut pairs = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        let summary = by_id.get(cluster.cluster_id.as_str()).ok_or_else(|| {
            CliError::Input(format!(
                "cluster ids do not align: no summary for {:?}",
                cluster.cluster_id
            ))
        })?;
        pairs.push((tokenize(summary), cluster.summary.tokens()));
    }

    let report = score_pairs(&pairs);
    let label = label
        .map(str::to_string)
        .or_else(|| {
            summaries_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| "summaries".into());
    let csv = format!(
        "method,rouge1,rouge2,rougeL\n{label},{:.2},{:.2},{:.2}\n",
        report.rouge1, report.rouge2, report.rouge_l
    );
    print!("{csv}");
    if let Some(output) = output {
        let logger = ManifestLogger::start(
            "evaluate",
            serde_json::Value::Null,
            0,
            &[summaries_path, dataset_path],
        );
        std::fs::write(output, csv.as_bytes())?;
        logger.finish(output)?;
    }
    Ok(())
}

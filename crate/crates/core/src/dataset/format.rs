//! The dataset wire format: one JSON object per line, UTF-8, LF endings.
//! This format is both the builder's output and the model/baseline input.

use super::DatasetError;
use crate::text::{Document, DocumentCluster, Language, Split};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub lang: Language,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub cluster_id: String,
    pub split: Split,
    pub documents: Vec<DocumentRecord>,
    pub summary: String,
}

impl ClusterRecord {
    pub fn from_cluster(cluster: &DocumentCluster) -> Self {
        ClusterRecord {
            cluster_id: cluster.cluster_id.clone(),
            split: cluster.split,
            documents: cluster
                .documents
                .iter()
                .map(|d| DocumentRecord {
                    lang: d.language,
                    text: d.raw_text.clone(),
                })
                .collect(),
            summary: cluster.summary.raw_text.clone(),
        }
    }

    pub fn into_cluster(self) -> Result<DocumentCluster, DatasetError> {
        let documents = self
            .documents
            .into_iter()
            .map(|d| Document::new(d.lang, &d.text))
            .collect();
        DocumentCluster::new(
            self.cluster_id,
            documents,
            Document::new(Language::En, &self.summary),
            self.split,
        )
        .map_err(DatasetError::from)
    }
}

/// One generated summary, keyed to its source cluster.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub cluster_id: String,
    pub summary: String,
}

/// Parse a JSONL stream of clusters. Parse failures report the 1-based
/// line number.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<DocumentCluster>, DatasetError> {
    let mut clusters = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ClusterRecord =
            serde_json::from_str(&line).map_err(|e| DatasetError::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
        clusters.push(record.into_cluster().map_err(|e| DatasetError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(clusters)
}

/// Serialize clusters one JSON object per line with LF endings.
pub fn write_jsonl<W: Write>(
    mut writer: W,
    clusters: &[DocumentCluster],
) -> Result<(), DatasetError> {
    for cluster in clusters {
        let record = ClusterRecord::from_cluster(cluster);
        let line = serde_json::to_string(&record).map_err(|e| {
            DatasetError::InvalidInput(format!("serialize {}: {e}", cluster.cluster_id))
        })?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Parse a JSONL stream of summary records with line-numbered errors.
pub fn read_summaries<R: BufRead>(reader: R) -> Result<Vec<SummaryRecord>, DatasetError> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SummaryRecord =
            serde_json::from_str(&line).map_err(|e| DatasetError::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

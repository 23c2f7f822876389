//! `mixsum dump-graph`: debugging dump of the constructed graphs (nodes,
//! edges, weights) for one or all clusters as JSON.

use super::load_clusters;
use crate::error::CliError;
use mixsum_core::graph::{build_heterogeneous, build_homogeneous, HashEmbedder};
use mixsum_core::model::ModelConfig;
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct GraphDump {
    cluster_id: String,
    sentences: Vec<String>,
    homogeneous_edges: Vec<(usize, usize)>,
    words: Vec<String>,
    heterogeneous_edges: Vec<HeteroEdgeDump>,
}

#[derive(Serialize)]
struct HeteroEdgeDump {
    sentence: usize,
    word: usize,
    weight: f64,
}

pub fn run(input: &Path, output: &Path, cluster_id: Option<&str>) -> Result<(), CliError> {
    let clusters = load_clusters(input)?;
    let config = ModelConfig::default();
    let embedder = HashEmbedder::new(config.extractor.dim, config.extractor.seed);
    let mut dumps = Vec::new();
    for cluster in &clusters {
        if let Some(wanted) = cluster_id {
            if cluster.cluster_id != wanted {
                continue;
            }
        }
        let homo = build_homogeneous(cluster, &embedder);
        let mut homogeneous_edges = Vec::new();
        for (i, list) in homo.neighbors.iter().enumerate() {
            for &j in list {
                if i <= j {
                    homogeneous_edges.push((i, j));
                }
            }
        }
        let (words, heterogeneous_edges) =
            match build_heterogeneous(cluster, &embedder, config.extractor.seed) {
                Ok(g) => (
                    g.words.clone(),
                    g.edges
                        .iter()
                        .map(|e| HeteroEdgeDump {
                            sentence: e.sentence,
                            word: e.word,
                            weight: e.weight,
                        })
                        .collect(),
                ),
                Err(_) => (Vec::new(), Vec::new()),
            };
        dumps.push(GraphDump {
            cluster_id: cluster.cluster_id.clone(),
            sentences: cluster.sentences().iter().map(|s| s.text.clone()).collect(),
            homogeneous_edges,
            words,
            heterogeneous_edges,
        });
    }
    if cluster_id.is_some() && dumps.is_empty() {
        return Err(CliError::Input(format!(
            "cluster {:?} not found in {}",
            cluster_id.unwrap_or_default(),
            input.display()
        )));
    }
    let body = serde_json::to_vec_pretty(&dumps)
        .map_err(|e| CliError::Input(format!("serialize graphs: {e}")))?;
    std::fs::write(output, body)?;
    Ok(())
}

//! `mixsum build-dataset`: round-trip score, greedily assign languages,
//! replace documents, and emit dataset JSONL.

use super::{load_clusters, make_backend};
use crate::config::AppConfig;
use crate::error::CliError;
use crate::manifest::ManifestLogger;
use crate::BackendChoice;
use mixsum_core::dataset::{build_pair, corpus_stats, write_jsonl};
use std::path::Path;

pub fn run(
    input: &Path,
    output: &Path,
    config_path: Option<&Path>,
    seed: Option<u64>,
    backend_choice: BackendChoice,
) -> Result<(), CliError> {
    let config = AppConfig::from_args(config_path, seed).map_err(CliError::Input)?;
    let clusters = load_clusters(input)?;
    let backend = make_backend(backend_choice, &config.builder)?;
    let logger = ManifestLogger::start(
        "build-dataset",
        serde_json::to_value(&config).unwrap_or(serde_json::Value::Null),
        config.builder.seed,
        &[input],
    );

    let mut pairs = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        pairs.push(build_pair(cluster, &config.builder, backend.as_ref())?);
    }

    let file = std::fs::File::create(output)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", output.display())))?;
    let mut writer = std::io::BufWriter::new(file);
    write_jsonl(&mut writer, &pairs)?;
    use std::io::Write;
    writer.flush()?;

    let report = corpus_stats(pairs.iter());
    print!("{}", super::stats::render_table(&report));
    logger.finish(output)?;
    Ok(())
}

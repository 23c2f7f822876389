//! `mixsum train-extractor`: train the extract-generate model on a JSONL
//! corpus, reporting per-epoch losses, and write the checkpoint plus its
//! vocabulary file.

use super::load_clusters;
use crate::config::AppConfig;
use crate::error::CliError;
use crate::manifest::ManifestLogger;
use mixsum_core::model::SummarizationModel;
use std::path::Path;

pub fn run(
    input: &Path,
    output: &Path,
    config_path: Option<&Path>,
    seed: Option<u64>,
    epochs: Option<usize>,
) -> Result<(), CliError> {
    let config = AppConfig::from_args(config_path, seed).map_err(CliError::Input)?;
    let epochs = epochs.unwrap_or(config.train_epochs);
    let clusters = load_clusters(input)?;
    if clusters.is_empty() {
        return Err(CliError::Input("no training clusters in input".into()));
    }
    let logger = ManifestLogger::start(
        "train-extractor",
        serde_json::to_value(&config).unwrap_or(serde_json::Value::Null),
        config.model.extractor.seed,
        &[input],
    );

    let vocab = SummarizationModel::vocab_from_corpus(&clusters);
    let mut model = SummarizationModel::new(vocab, config.model);
    for epoch in 1..=epochs {
        let report = model.train_epoch(&clusters)?;
        println!(
            "epoch {epoch:>3}  total {:.6}  ext {:.6}  gen {:.6}  con {:.6}",
            report.mean_total,
            report.mean_extraction,
            report.mean_generation,
            report.mean_consistency
        );
    }
    model.save(output)?;
    logger.finish(output)?;
    Ok(())
}

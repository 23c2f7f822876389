pub mod build;
pub mod dump_graph;
pub mod evaluate;
pub mod stats;
pub mod summarize;
pub mod sweep;
pub mod train;

use crate::error::CliError;
use crate::BackendChoice;
use mixsum_core::dataset::{
    read_jsonl, BuilderConfig, CachedBackend, HttpBackend, MockBackend, TranslationBackend,
};
use mixsum_core::text::DocumentCluster;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Environment variable overriding the translation cache directory.
pub const CACHE_DIR_ENV: &str = "MIXSUM_CACHE_DIR";

pub fn load_clusters(path: &Path) -> Result<Vec<DocumentCluster>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    read_jsonl(std::io::BufReader::new(file)).map_err(CliError::from)
}

fn cache_dir(config: &BuilderConfig) -> Option<PathBuf> {
    std::env::var(CACHE_DIR_ENV)
        .ok()
        .map(PathBuf::from)
        .or_else(|| config.cache_dir.clone())
}

pub fn make_backend(
    choice: BackendChoice,
    config: &BuilderConfig,
) -> Result<Box<dyn TranslationBackend>, CliError> {
    let dir = cache_dir(config);
    match choice {
        BackendChoice::Mock => Ok(Box::new(CachedBackend::new(
            MockBackend::new(config.seed),
            dir,
        ))),
        BackendChoice::Http => {
            let http = HttpBackend::from_env(
                Duration::from_secs(config.http_timeout_secs),
                config.http_retries,
            )?;
            Ok(Box::new(CachedBackend::new(http, dir)))
        }
    }
}

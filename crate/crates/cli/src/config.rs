//! One JSON configuration file covering dataset construction, the model,
//! and training. Every field has a default, so `{}` is a valid config.

use mixsum_core::dataset::BuilderConfig;
use mixsum_core::model::ModelConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub builder: BuilderConfig,
    pub model: ModelConfig,
    pub train_epochs: usize,
    pub summary_budget: usize,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            builder: BuilderConfig::default(),
            model: ModelConfig::default(),
            train_epochs: 50,
            summary_budget: mixsum_core::baselines::DEFAULT_BUDGET,
        }
    }
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let bytes = std::fs::read(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| format!("cannot parse config {}: {e}", path.display()))
    }

    /// Route one `--seed` override into every seeded component.
    pub fn override_seed(&mut self, seed: u64) {
        self.builder.seed = seed;
        self.model.extractor.seed = seed;
    }

    pub fn from_args(path: Option<&Path>, seed: Option<u64>) -> Result<Self, String> {
        let mut config = match path {
            Some(p) => AppConfig::load(p)?,
            None => AppConfig::default(),
        };
        if let Some(seed) = seed {
            config.override_seed(seed);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        let e = &self.model.extractor;
        if e.k < 1 {
            return Err("extractor.k must be at least 1".into());
        }
        if e.hetero_iterations < 1 {
            return Err("extractor.hetero_iterations must be at least 1".into());
        }
        if e.dim < 1 || self.model.lm_dim < 1 {
            return Err("model dimensions must be at least 1".into());
        }
        let l = &self.model.loss;
        if l.lambda_ext < 0.0 || l.lambda_gen < 0.0 || l.lambda_con < 0.0 {
            return Err("loss weights must be non-negative".into());
        }
        for (lang, t) in &self.builder.thresholds {
            if !(0.0..=100.0).contains(t) {
                return Err(format!("threshold for {lang} must be in [0, 100]"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_parses_to_defaults() {
        let config: AppConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(config.model.extractor.k, 10);
        assert_eq!(config.train_epochs, 50);
        assert_eq!(config.summary_budget, 10);
        assert_eq!(
            config
                .builder
                .threshold_for(mixsum_core::text::Language::Fr),
            88.03
        );
    }

    #[test]
    fn seed_override_reaches_components() {
        let mut config = AppConfig::default();
        config.override_seed(99);
        assert_eq!(config.builder.seed, 99);
        assert_eq!(config.model.extractor.seed, 99);
    }

    #[test]
    fn partial_config_keeps_other_defaults() {
        let config: AppConfig = serde_json::from_str(r#"{"train_epochs": 7}"#).unwrap();
        assert_eq!(config.train_epochs, 7);
        assert_eq!(config.summary_budget, 10);
    }
}

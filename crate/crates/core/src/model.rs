//! The end-to-end extract-generate model: graph construction, extractor,
//! toy conditional LM, joint loss, training loop, and checkpointing.

use crate::extractor::{
    extract_key_snippet, extractor_loss_graph, oracle_labels, select_top_k, ExtractorConfig,
    ExtractorModel, ExtractorState,
};
use crate::generator::{
    generate, DecodeMode, GeneratorError, LossConfig, RecurrentLm, Vocab, EOS_ID,
};
use crate::graph::{build_heterogeneous, build_homogeneous, GraphError, HashEmbedder};
use crate::nn::{checkpoint, sgd_step_grouped, Graph, NnError, ParamSet, Var};
use crate::text::DocumentCluster;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("cluster {0:?} has no sentences to extract")]
    EmptyCluster(String),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ModelConfig {
    pub extractor: ExtractorConfig,
    pub loss: LossConfig,
    /// Toy LM embedding/recurrent width.
    pub lm_dim: usize,
    pub lm_learning_rate: f64,
    /// Decode length cap for generated summaries.
    pub max_summary_len: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            extractor: ExtractorConfig::default(),
            loss: LossConfig::default(),
            lm_dim: crate::generator::LM_DIM,
            lm_learning_rate: 5e-5,
            max_summary_len: 64,
        }
    }
}

/// Loss components evaluated on one cluster.
#[derive(Debug, Clone)]
pub struct ClusterLosses {
    pub total: f64,
    pub extraction: f64,
    pub generation: f64,
    pub consistency: f64,
    pub indices: Vec<usize>,
}

/// Mean losses over an epoch.
#[derive(Debug, Clone, Default)]
pub struct EpochReport {
    pub mean_total: f64,
    pub mean_extraction: f64,
    pub mean_generation: f64,
    pub mean_consistency: f64,
    pub clusters: usize,
}

#[derive(Clone)]
pub struct SummarizationModel {
    pub params: ParamSet,
    pub extractor: ExtractorModel,
    pub lm: RecurrentLm,
    pub vocab: Vocab,
    pub config: ModelConfig,
    embedder: HashEmbedder,
}

struct LossVars {
    total: Var,
    extraction: Var,
    generation: Var,
    consistency: Var,
    indices: Vec<usize>,
}

impl SummarizationModel {
    pub fn new(vocab: Vocab, config: ModelConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.extractor.seed);
        let mut params = ParamSet::new();
        let extractor = ExtractorModel::new(&mut params, config.extractor.dim, &mut rng);
        let lm = RecurrentLm::new(&mut params, vocab.len(), config.lm_dim, &mut rng);
        let embedder = HashEmbedder::new(config.extractor.dim, config.extractor.seed);
        SummarizationModel {
            params,
            extractor,
            lm,
            vocab,
            config,
            embedder,
        }
    }

    /// Build a vocabulary from every document and summary token of the
    /// corpus.
    pub fn vocab_from_corpus(clusters: &[DocumentCluster]) -> Vocab {
        let mut tokens: Vec<&str> = Vec::new();
        for cluster in clusters {
            for doc in &cluster.documents {
                for sentence in &doc.sentences {
                    tokens.extend(sentence.tokens.iter().map(String::as_str));
                }
            }
            for sentence in &cluster.summary.sentences {
                tokens.extend(sentence.tokens.iter().map(String::as_str));
            }
        }
        Vocab::build(tokens)
    }

    pub fn embedder(&self) -> &HashEmbedder {
        &self.embedder
    }

    /// Assemble the full differentiable loss for one cluster on `graph`.
    /// `pinned_indices` overrides the top-k selection; the gradient checker
    /// uses it to stay on one smooth piece of the otherwise discrete
    /// selection.
    fn build_losses(
        &self,
        graph: &mut Graph,
        cluster: &DocumentCluster,
        pinned_indices: Option<&[usize]>,
    ) -> Result<LossVars, ModelError> {
        if cluster.sentence_count() == 0 {
            return Err(ModelError::EmptyCluster(cluster.cluster_id.clone()));
        }
        let homo = build_homogeneous(cluster, &self.embedder);
        let hetero = build_heterogeneous(cluster, &self.embedder, self.config.extractor.seed)?;
        let vars = self.extractor.forward(
            graph,
            &self.params,
            &homo,
            &hetero,
            self.config.extractor.hetero_iterations,
        )?;

        let labels = oracle_labels(cluster, &self.embedder, self.config.extractor.k);
        let extraction = extractor_loss_graph(graph, vars.scores, &labels)?;

        let indices = match pinned_indices {
            Some(pinned) => pinned.to_vec(),
            None => {
                let scores = graph.value(vars.scores).data().to_vec();
                select_top_k(&scores, self.config.extractor.k)
            }
        };
        let snippet = extract_key_snippet(cluster, &indices);
        let snippets: Vec<Vec<usize>> = snippet
            .sentences
            .iter()
            .map(|s| self.vocab.encode(&s.tokens))
            .collect();
        let mut reference = self.vocab.encode(&cluster.summary.tokens());
        reference.push(EOS_ID);

        let (generation, step_weights) =
            self.lm
                .sequence_loss_graph(graph, &self.params, &snippets, &reference)?;

        // consistency: KL(mean_t weights || softmax(selected scores))
        let selected = graph.gather_rows(vars.scores, &indices)?;
        let target = graph.softmax_flat(selected);
        let steps = step_weights.len() as f64;
        let mut mean = step_weights[0];
        for &w in &step_weights[1..] {
            mean = graph.add(mean, w)?;
        }
        let mean = graph.scale(mean, 1.0 / steps);
        let mean_floored = graph.clamp(mean, 1e-30, 1.0);
        let target_floored = graph.clamp(target, crate::generator::CONSISTENCY_CLAMP, 1.0);
        let ln_p = graph.ln(mean_floored);
        let ln_q = graph.ln(target_floored);
        let diff = graph.sub(ln_p, ln_q)?;
        let terms = graph.mul(mean, diff)?;
        let consistency = graph.sum_all(terms);

        let weighted_ext = graph.scale(extraction, self.config.loss.lambda_ext);
        let weighted_gen = graph.scale(generation, self.config.loss.lambda_gen);
        let weighted_con = graph.scale(consistency, self.config.loss.lambda_con);
        let partial = graph.add(weighted_ext, weighted_gen)?;
        let total = graph.add(partial, weighted_con)?;

        Ok(LossVars {
            total,
            extraction,
            generation,
            consistency,
            indices,
        })
    }

    fn read_losses(graph: &Graph, vars: &LossVars) -> ClusterLosses {
        ClusterLosses {
            total: graph.value(vars.total).item(),
            extraction: graph.value(vars.extraction).item(),
            generation: graph.value(vars.generation).item(),
            consistency: graph.value(vars.consistency).item(),
            indices: vars.indices.clone(),
        }
    }

    /// Differentiable total loss for gradient verification. Pinning the
    /// key-sentence indices keeps finite differences on one smooth piece of
    /// the piecewise objective.
    pub fn total_loss_graph(
        &self,
        graph: &mut Graph,
        cluster: &DocumentCluster,
        pinned_indices: Option<&[usize]>,
    ) -> Result<Var, ModelError> {
        Ok(self.build_losses(graph, cluster, pinned_indices)?.total)
    }

    /// Forward-only loss evaluation.
    pub fn evaluate_cluster(&self, cluster: &DocumentCluster) -> Result<ClusterLosses, ModelError> {
        let mut graph = Graph::new();
        let vars = self.build_losses(&mut graph, cluster, None)?;
        Ok(Self::read_losses(&graph, &vars))
    }

    /// One SGD step on one cluster; returns the pre-update losses.
    pub fn train_cluster(
        &mut self,
        cluster: &DocumentCluster,
    ) -> Result<ClusterLosses, ModelError> {
        let mut graph = Graph::new();
        let vars = self.build_losses(&mut graph, cluster, None)?;
        let losses = Self::read_losses(&graph, &vars);
        graph.backward(vars.total, &mut self.params)?;
        let extractor_lr = self.config.extractor.learning_rate;
        let lm_lr = self.lm_learning_rate();
        sgd_step_grouped(&mut self.params, |name| {
            if name.starts_with("lm.") {
                lm_lr
            } else {
                extractor_lr
            }
        });
        Ok(losses)
    }

    fn lm_learning_rate(&self) -> f64 {
        self.config.lm_learning_rate
    }

    pub fn train_epoch(&mut self, clusters: &[DocumentCluster]) -> Result<EpochReport, ModelError> {
        let mut report = EpochReport::default();
        for cluster in clusters {
            let losses = self.train_cluster(cluster)?;
            report.mean_total += losses.total;
            report.mean_extraction += losses.extraction;
            report.mean_generation += losses.generation;
            report.mean_consistency += losses.consistency;
            report.clusters += 1;
        }
        let n = report.clusters.max(1) as f64;
        report.mean_total /= n;
        report.mean_extraction /= n;
        report.mean_generation /= n;
        report.mean_consistency /= n;
        Ok(report)
    }

    /// Mean total loss over the corpus without updating parameters.
    pub fn evaluate_corpus(&self, clusters: &[DocumentCluster]) -> Result<EpochReport, ModelError> {
        let mut report = EpochReport::default();
        for cluster in clusters {
            let losses = self.evaluate_cluster(cluster)?;
            report.mean_total += losses.total;
            report.mean_extraction += losses.extraction;
            report.mean_generation += losses.generation;
            report.mean_consistency += losses.consistency;
            report.clusters += 1;
        }
        let n = report.clusters.max(1) as f64;
        report.mean_total /= n;
        report.mean_extraction /= n;
        report.mean_generation /= n;
        report.mean_consistency /= n;
        Ok(report)
    }

    /// Fraction of predicted key sentences that agree with the oracle
    /// labels, |predicted ∩ labeled| / min(k, n).
    pub fn extraction_accuracy(&self, cluster: &DocumentCluster) -> Result<f64, ModelError> {
        let indices = self.predict_indices(cluster)?;
        let labels = oracle_labels(cluster, &self.embedder, self.config.extractor.k);
        let positives = labels.positives();
        let hits = indices.iter().filter(|i| positives.contains(i)).count();
        Ok(hits as f64 / indices.len().max(1) as f64)
    }

    /// Full extractor evaluation on one cluster.
    pub fn extract(&self, cluster: &DocumentCluster) -> Result<ExtractorState, ModelError> {
        if cluster.sentence_count() == 0 {
            return Err(ModelError::EmptyCluster(cluster.cluster_id.clone()));
        }
        let homo = build_homogeneous(cluster, &self.embedder);
        let hetero = build_heterogeneous(cluster, &self.embedder, self.config.extractor.seed)?;
        Ok(self.extractor.evaluate(
            &self.params,
            &homo,
            &hetero,
            self.config.extractor.hetero_iterations,
            self.config.extractor.k,
        )?)
    }

    /// Top-k sentence indices under the current parameters.
    pub fn predict_indices(&self, cluster: &DocumentCluster) -> Result<Vec<usize>, ModelError> {
        Ok(self.extract(cluster)?.indices)
    }

    /// Extract key sentences and decode a summary greedily.
    pub fn summarize(&self, cluster: &DocumentCluster) -> Result<String, ModelError> {
        let indices = self.predict_indices(cluster)?;
        let snippet = extract_key_snippet(cluster, &indices);
        let snippets: Vec<Vec<usize>> = snippet
            .sentences
            .iter()
            .map(|s| self.vocab.encode(&s.tokens))
            .collect();
        let bound = self.lm.bind(&self.params);
        let ids = generate(
            &bound,
            &snippets,
            self.config.max_summary_len,
            DecodeMode::Greedy,
        )?;
        Ok(self.vocab.decode(&ids).join(" "))
    }

    /// Sibling file holding the vocabulary next to a checkpoint.
    pub fn vocab_path(checkpoint_path: &Path) -> PathBuf {
        let mut os = checkpoint_path.as_os_str().to_os_string();
        os.push(".vocab");
        PathBuf::from(os)
    }

    /// Write parameters plus configuration; the vocabulary goes to the
    /// sibling `.vocab` file.
    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let meta =
            serde_json::to_value(self.config).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        checkpoint::save(path, &self.params, meta)?;
        self.vocab
            .save(&Self::vocab_path(path))
            .map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let (loaded, meta) = checkpoint::load(path)?;
        let config: ModelConfig = serde_json::from_value(meta)
            .map_err(|e| ModelError::Checkpoint(format!("bad metadata: {e}")))?;
        let vocab = Vocab::load(&Self::vocab_path(path))
            .map_err(|e| ModelError::Checkpoint(format!("vocabulary: {e}")))?;
        let mut model = SummarizationModel::new(vocab, config);
        for parameter in loaded.iter() {
            let id = model.params.id_of(&parameter.name).ok_or_else(|| {
                ModelError::Checkpoint(format!("unknown parameter {:?}", parameter.name))
            })?;
            if model.params.get(id).value.shape() != parameter.value.shape() {
                return Err(ModelError::Checkpoint(format!(
                    "shape mismatch for {:?}",
                    parameter.name
                )));
            }
            model.params.get_mut(id).value = parameter.value.clone();
        }
        Ok(model)
    }
}

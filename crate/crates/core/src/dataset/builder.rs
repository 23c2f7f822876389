//! Round-trip scoring, thresholding, greedy language assignment, and
//! document replacement.

use super::backend::TranslationBackend;
use super::DatasetError;
use crate::rouge::rouge_1_percent;
use crate::text::{tokenize, Document, DocumentCluster, Language};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

/// Construction parameters. Threshold defaults are the published values for
/// French, German, and Spanish on the 0-100 ROUGE-1 scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BuilderConfig {
    pub thresholds: BTreeMap<Language, f64>,
    pub candidate_languages: Vec<Language>,
    pub cache_dir: Option<PathBuf>,
    pub seed: u64,
    pub http_timeout_secs: u64,
    pub http_retries: u32,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        let mut thresholds = BTreeMap::new();
        thresholds.insert(Language::Fr, 88.03);
        thresholds.insert(Language::De, 87.05);
        thresholds.insert(Language::Es, 89.25);
        BuilderConfig {
            thresholds,
            candidate_languages: vec![Language::Es, Language::Fr, Language::De],
            cache_dir: None,
            seed: 0,
            http_timeout_secs: 30,
            http_retries: 3,
        }
    }
}

impl BuilderConfig {
    pub fn threshold_for(&self, language: Language) -> f64 {
        self.thresholds.get(&language).copied().unwrap_or(0.0)
    }

    fn validate(&self) -> Result<(), DatasetError> {
        for (lang, t) in &self.thresholds {
            if !(0.0..=100.0).contains(t) {
                return Err(DatasetError::InvalidInput(format!(
                    "threshold for {lang} must be in [0, 100], got {t}"
                )));
            }
        }
        if self.candidate_languages.contains(&Language::En) {
            return Err(DatasetError::InvalidInput(
                "candidate languages must not include English".into(),
            ));
        }
        Ok(())
    }
}

/// Thresholded document-by-language score matrix. Rows follow cluster
/// document order; columns follow the configured candidate-language order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub languages: Vec<Language>,
    pub entries: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.languages.len()
    }
}

/// One language per document, in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageAssignment(pub Vec<Language>);

/// Result of one forward/back translation pass.
#[derive(Debug, Clone)]
pub struct RoundTripScore {
    /// ROUGE-1 F1 between back-translation and original, 0-100.
    pub score: f64,
    /// The forward translation, kept for document replacement.
    pub forward: String,
}

/// Forward-translate `doc` into `target`, translate back, and score the
/// round trip with ROUGE-1 on the 0-100 scale. The forward translation is
/// returned so the builder can cache it for replacement.
pub fn round_trip_score(
    doc: &Document,
    target: Language,
    backend: &dyn TranslationBackend,
) -> Result<RoundTripScore, DatasetError> {
    if doc.language != Language::En {
        return Err(DatasetError::InvalidInput(format!(
            "round-trip scoring expects English documents, got {}",
            doc.language
        )));
    }
    if target == Language::En {
        return Err(DatasetError::InvalidInput(
            "round-trip target must not be English".into(),
        ));
    }
    let forward = backend
        .translate(&doc.raw_text, Language::En, target)
        .map_err(|source| DatasetError::Transport {
            cluster_id: String::new(),
            target,
            source,
        })?;
    let back = backend
        .translate(&forward, target, Language::En)
        .map_err(|source| DatasetError::Transport {
            cluster_id: String::new(),
            target,
            source,
        })?;
    let score = rouge_1_percent(&tokenize(&back), &tokenize(&doc.raw_text));
    Ok(RoundTripScore { score, forward })
}

/// Scores below the threshold are zeroed; scores equal to or above it are
/// retained unchanged.
pub fn apply_threshold(score: f64, threshold: f64) -> f64 {
    if score < threshold {
        0.0
    } else {
        score
    }
}

/// A cluster's thresholded score matrix plus the forward translations that
/// produced it.
#[derive(Debug, Clone)]
pub struct ScoredCluster {
    pub matrix: ScoreMatrix,
    forwards: HashMap<(usize, Language), String>,
}

impl ScoredCluster {
    pub fn forward_translation(&self, doc_index: usize, language: Language) -> Option<&str> {
        self.forwards
            .get(&(doc_index, language))
            .map(String::as_str)
    }
}

/// Round-trip score every document against every candidate language,
/// thresholding entry-wise at assembly time.
pub fn score_cluster(
    cluster: &DocumentCluster,
    config: &BuilderConfig,
    backend: &dyn TranslationBackend,
) -> Result<ScoredCluster, DatasetError> {
    config.validate()?;
    let mut entries = Vec::with_capacity(cluster.documents.len());
    let mut forwards = HashMap::new();
    for (doc_index, doc) in cluster.documents.iter().enumerate() {
        let mut row = Vec::with_capacity(config.candidate_languages.len());
        for &language in &config.candidate_languages {
            let trip = round_trip_score(doc, language, backend).map_err(|e| match e {
                DatasetError::Transport { target, source, .. } => DatasetError::Transport {
                    cluster_id: cluster.cluster_id.clone(),
                    target,
                    source,
                },
                other => other,
            })?;
            row.push(apply_threshold(trip.score, config.threshold_for(language)));
            forwards.insert((doc_index, language), trip.forward);
        }
        entries.push(row);
    }
    Ok(ScoredCluster {
        matrix: ScoreMatrix {
            languages: config.candidate_languages.clone(),
            entries,
        },
        forwards,
    })
}

/// Iterative global-argmax assignment: pick the largest surviving entry,
/// assign its column language to its row document, delete both, and repeat.
/// When every surviving entry is zero, all remaining documents stay
/// English; documents left after column exhaustion also stay English.
/// Ties break to the lowest column index, then the lowest row index.
pub fn greedy_assign(matrix: &ScoreMatrix) -> LanguageAssignment {
    let rows = matrix.rows();
    let cols = matrix.cols();
    let mut assignment = vec![Language::En; rows];
    let mut row_active = vec![true; rows];
    let mut col_active = vec![true; cols];
    let mut remaining_rows = rows;
    let mut remaining_cols = cols;

    while remaining_rows > 0 && remaining_cols > 0 {
        let mut best = 0.0;
        let mut best_cell: Option<(usize, usize)> = None;
        // column-major scan with strict improvement: equal maxima resolve to
        // the lowest column, then the lowest row
        for (col, &col_ok) in col_active.iter().enumerate() {
            if !col_ok {
                continue;
            }
            for (row, &row_ok) in row_active.iter().enumerate() {
                if !row_ok {
                    continue;
                }
                if matrix.entries[row][col] > best {
                    best = matrix.entries[row][col];
                    best_cell = Some((row, col));
                }
            }
        }
        let Some((row, col)) = best_cell else {
            break; // all surviving entries are zero: remaining rows stay English
        };
        assignment[row] = matrix.languages[col];
        row_active[row] = false;
        col_active[col] = false;
        remaining_rows -= 1;
        remaining_cols -= 1;
    }
    LanguageAssignment(assignment)
}

/// Run the full pipeline for one cluster: score, assign, and replace each
/// document's text with its cached forward translation into the assigned
/// language. Cluster id, document order, and the summary are preserved.
pub fn build_pair(
    cluster: &DocumentCluster,
    config: &BuilderConfig,
    backend: &dyn TranslationBackend,
) -> Result<DocumentCluster, DatasetError> {
    for doc in &cluster.documents {
        if doc.language != Language::En {
            return Err(DatasetError::InvalidInput(format!(
                "cluster {:?} contains a non-English source document",
                cluster.cluster_id
            )));
        }
    }
    let scored = score_cluster(cluster, config, backend)?;
    let assignment = greedy_assign(&scored.matrix);
    replace_documents(cluster, &assignment, &scored)
}

/// Swap document contents for their forward translations per the
/// assignment. Missing cached translations are an internal error.
pub fn replace_documents(
    cluster: &DocumentCluster,
    assignment: &LanguageAssignment,
    scored: &ScoredCluster,
) -> Result<DocumentCluster, DatasetError> {
    if assignment.0.len() != cluster.documents.len() {
        return Err(DatasetError::Consistency(format!(
            "assignment covers {} documents but cluster {:?} has {}",
            assignment.0.len(),
            cluster.cluster_id,
            cluster.documents.len()
        )));
    }
    let mut documents = Vec::with_capacity(cluster.documents.len());
    for (doc_index, (doc, &language)) in cluster.documents.iter().zip(&assignment.0).enumerate() {
        if language == Language::En {
            documents.push(doc.clone());
            continue;
        }
        let forward = scored
            .forward_translation(doc_index, language)
            .ok_or_else(|| {
                DatasetError::Consistency(format!(
                    "no cached forward translation for document {doc_index} into {language}"
                ))
            })?;
        documents.push(Document::new(language, forward));
    }
    DocumentCluster::new(
        cluster.cluster_id.clone(),
        documents,
        cluster.summary.clone(),
        cluster.split,
    )
    .map_err(DatasetError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::backend::{IdentityBackend, MockBackend, MockNoise, TransportError};
    use crate::text::Split;

    fn english_cluster(texts: &[&str]) -> DocumentCluster {
        let docs = texts
            .iter()
            .map(|t| Document::new(Language::En, t))
            .collect();
        DocumentCluster::new(
            "c0",
            docs,
            Document::new(Language::En, "Summary sentence."),
            Split::Train,
        )
        .unwrap()
    }

    fn matrix(languages: Vec<Language>, entries: Vec<Vec<f64>>) -> ScoreMatrix {
        ScoreMatrix { languages, entries }
    }

    #[test]
    fn identity_backend_scores_100() {
        let doc = Document::new(Language::En, "Alpha beta gamma.");
        for target in [Language::De, Language::Fr, Language::Es] {
            let trip = round_trip_score(&doc, target, &IdentityBackend).unwrap();
            assert_eq!(trip.score, 100.0);
        }
    }

    #[test]
    fn drop_last_token_hand_score() {
        // 4-token document loses one token: f1 = 2*3/(2*4-1) = 6/7
        let doc = Document::new(Language::En, "one two three four");
        let backend = MockBackend::with_noise(0, MockNoise::DropLastToken);
        let trip = round_trip_score(&doc, Language::Fr, &backend).unwrap();
        let expected = 100.0 * 6.0 / 7.0;
        assert!((trip.score - expected).abs() < 1e-9, "{}", trip.score);
    }

    #[test]
    fn backend_failure_surfaces_transport_error() {
        struct Failing;
        impl TranslationBackend for Failing {
            fn translate(
                &self,
                _: &str,
                _: Language,
                _: Language,
            ) -> Result<String, TransportError> {
                Err(TransportError::Request {
                    attempts: 1,
                    message: "boom".into(),
                })
            }
        }
        let doc = Document::new(Language::En, "x y");
        let err = round_trip_score(&doc, Language::De, &Failing).unwrap_err();
        assert!(matches!(err, DatasetError::Transport { .. }));
    }

    #[test]
    fn rejects_non_english_source() {
        let doc = Document::new(Language::Fr, "Bonjour.");
        assert!(round_trip_score(&doc, Language::De, &IdentityBackend).is_err());
        let doc = Document::new(Language::En, "Hi.");
        assert!(round_trip_score(&doc, Language::En, &IdentityBackend).is_err());
    }

    #[test]
    fn threshold_boundary() {
        assert_eq!(apply_threshold(87.0, 88.03), 0.0);
        assert_eq!(apply_threshold(89.0, 88.03), 89.0);
        assert_eq!(apply_threshold(88.03, 88.03), 88.03);
        assert_eq!(apply_threshold(88.03 - 1e-9, 88.03), 0.0);
    }

    #[test]
    fn threshold_idempotent() {
        for score in [0.0, 50.0, 88.03, 99.9] {
            let once = apply_threshold(score, 88.03);
            assert_eq!(apply_threshold(once, 88.03), once);
        }
    }

    #[test]
    fn greedy_two_by_two_hand_trace() {
        let m = matrix(
            vec![Language::Fr, Language::De],
            vec![vec![90.0, 88.0], vec![89.0, 95.0]],
        );
        // max 95 at (doc 1, De); submatrix [[90.0]] gives doc 0 <- Fr
        assert_eq!(greedy_assign(&m).0, vec![Language::Fr, Language::De]);
    }

    #[test]
    fn greedy_all_zero_falls_back_to_english() {
        let m = matrix(
            vec![Language::Es, Language::Fr, Language::De],
            vec![vec![0.0; 3], vec![0.0; 3]],
        );
        assert_eq!(greedy_assign(&m).0, vec![Language::En, Language::En]);
    }

    #[test]
    fn greedy_single_nonzero_entry() {
        let m = matrix(
            vec![Language::Es, Language::Fr, Language::De],
            vec![
                vec![92.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ],
        );
        assert_eq!(
            greedy_assign(&m).0,
            vec![Language::Es, Language::En, Language::En]
        );
    }

    #[test]
    fn greedy_tie_breaks_lowest_column_then_row() {
        let m = matrix(
            vec![Language::Es, Language::Fr, Language::De],
            vec![vec![100.0; 3], vec![100.0; 3]],
        );
        // step 1: (row 0, Es); step 2 over remaining cols {Fr, De}: (row 1, Fr)
        assert_eq!(greedy_assign(&m).0, vec![Language::Es, Language::Fr]);
    }

    #[test]
    fn greedy_column_exhaustion_defaults_english() {
        let m = matrix(
            vec![Language::Es, Language::Fr],
            vec![vec![90.0, 91.0], vec![92.0, 93.0], vec![94.0, 95.0]],
        );
        let a = greedy_assign(&m).0;
        // 3 docs, 2 languages: one document must stay English
        assert_eq!(a.iter().filter(|&&l| l == Language::En).count(), 1);
    }

    #[test]
    fn build_pair_all_zero_matrix_is_identity() {
        // two-token docs lose half their text on forward translation:
        // f1 = 2/3 < every default threshold, so the matrix is all zero
        let cluster = english_cluster(&["First doc.", "Second doc."]);
        let backend = MockBackend::with_noise(1, MockNoise::DropLastToken);
        let config = BuilderConfig::default();
        let out = build_pair(&cluster, &config, &backend).unwrap();
        assert_eq!(out, cluster);
    }

    #[test]
    fn build_pair_identity_backend_zero_thresholds() {
        let cluster = english_cluster(&["Doc one.", "Doc two."]);
        let mut config = BuilderConfig::default();
        config.thresholds.clear(); // threshold_for -> 0.0 everywhere
        let backend = MockBackend::new(0);
        let out = build_pair(&cluster, &config, &backend).unwrap();
        // all scores 100: tie-break assigns Es to doc 0, Fr to doc 1
        assert_eq!(out.documents[0].language, Language::Es);
        assert_eq!(out.documents[1].language, Language::Fr);
        assert_eq!(out.documents[0].raw_text, "es:Doc es:one.");
        assert_eq!(out.summary, cluster.summary);
        assert_eq!(out.cluster_id, cluster.cluster_id);
    }

    #[test]
    fn build_pair_matches_composed_oracles() {
        // two docs, drop-last-token mock, threshold 80: hand matrix says
        // every entry is 100*2(N-1)/(2N-1) which passes 80 for N >= 3
        let cluster = english_cluster(&["alpha beta gamma delta.", "one two three."]);
        let mut config = BuilderConfig::default();
        for lang in [Language::Es, Language::Fr, Language::De] {
            config.thresholds.insert(lang, 80.0);
        }
        let backend = MockBackend::with_noise(0, MockNoise::DropLastToken);
        let scored = score_cluster(&cluster, &config, &backend).unwrap();
        // doc 0 has 4 whitespace tokens -> 6/7; doc 1 has 3 -> 4/5
        assert!((scored.matrix.entries[0][0] - 100.0 * 6.0 / 7.0).abs() < 1e-9);
        assert!((scored.matrix.entries[1][0] - 100.0 * 4.0 / 5.0).abs() < 1e-9);
        let out = build_pair(&cluster, &config, &backend).unwrap();
        let expected = greedy_assign(&scored.matrix);
        let langs: Vec<Language> = out.documents.iter().map(|d| d.language).collect();
        assert_eq!(langs, expected.0);
    }

    #[test]
    fn replace_documents_missing_forward_is_consistency_error() {
        let cluster = english_cluster(&["Doc."]);
        let scored = ScoredCluster {
            matrix: matrix(vec![Language::Es], vec![vec![100.0]]),
            forwards: HashMap::new(),
        };
        let err = replace_documents(&cluster, &LanguageAssignment(vec![Language::Es]), &scored)
            .unwrap_err();
        assert!(matches!(err, DatasetError::Consistency(_)));
    }

    #[test]
    fn non_english_assignments_bounded_by_rows_and_columns() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let rows = rng.random_range(1..=6);
            let entries: Vec<Vec<f64>> = (0..rows)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            if rng.random_bool(0.5) {
                                0.0
                            } else {
                                rng.random_range(87.0..100.0)
                            }
                        })
                        .collect()
                })
                .collect();
            let m = matrix(
                vec![Language::Es, Language::Fr, Language::De],
                entries,
            );
            let assigned = greedy_assign(&m);
            let non_english = assigned.0.iter().filter(|&&l| l != Language::En).count();
            assert!(non_english <= rows.min(3));
        }
    }

    #[test]
    fn build_pair_preserves_order_and_count() {
        let cluster = english_cluster(&["A one two.", "B three four.", "C five six."]);
        let mut config = BuilderConfig::default();
        config.thresholds.clear();
        let out = build_pair(&cluster, &config, &MockBackend::new(0)).unwrap();
        assert_eq!(out.documents.len(), 3);
        // the original token text survives inside the tagged rendering, in order
        for (orig, new) in cluster.documents.iter().zip(&out.documents) {
            let first = orig.raw_text.split_whitespace().next().unwrap();
            assert!(new.raw_text.contains(first));
        }
    }
}

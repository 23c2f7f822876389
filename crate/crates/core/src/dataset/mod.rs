//! Dataset construction: round-trip translation scoring, thresholding,
//! greedy language assignment, document replacement, pair emission, and
//! corpus statistics.

pub mod backend;
pub mod builder;
pub mod format;
pub mod stats;

pub use backend::{
    CachedBackend, HttpBackend, IdentityBackend, MockBackend, MockNoise, TranslationBackend,
    TransportError,
};
pub use builder::{
    apply_threshold, build_pair, greedy_assign, round_trip_score, score_cluster, BuilderConfig,
    LanguageAssignment, RoundTripScore, ScoreMatrix, ScoredCluster,
};
pub use format::{read_jsonl, write_jsonl, ClusterRecord, DocumentRecord, SummaryRecord};
pub use stats::{corpus_stats, LanguageStats, SplitStats, StatsReport};

use crate::text::{Language, TextError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("transport failure for cluster {cluster_id:?} targeting {target}: {source}")]
    Transport {
        cluster_id: String,
        target: Language,
        #[source]
        source: TransportError,
    },
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

//! Corpus statistics: per-split pair counts and size averages, per-language
//! document counts and averages, and the languages-per-cluster histogram.

use crate::text::{DocumentCluster, Language, Split};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct LanguageStats {
    pub count: usize,
    pub avg_doc_words: f64,
    pub avg_doc_sents: f64,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct SplitStats {
    pub pairs: usize,
    pub avg_docs: f64,
    pub avg_cluster_words: f64,
    pub avg_cluster_sents: f64,
    pub avg_summary_words: f64,
    pub avg_summary_sents: f64,
    pub per_language: BTreeMap<Language, LanguageStats>,
    /// Index k holds the number of clusters spanning k+1 distinct languages.
    pub language_count_histogram: [usize; 4],
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct StatsReport {
    pub splits: BTreeMap<Split, SplitStats>,
}

impl StatsReport {
    pub fn split(&self, split: Split) -> Option<&SplitStats> {
        self.splits.get(&split)
    }

    pub fn total_pairs(&self) -> usize {
        self.splits.values().map(|s| s.pairs).sum()
    }
}

#[derive(Default)]
struct LanguageAccumulator {
    docs: usize,
    words: usize,
    sents: usize,
}

#[derive(Default)]
struct SplitAccumulator {
    pairs: usize,
    docs: usize,
    cluster_words: usize,
    cluster_sents: usize,
    summary_words: usize,
    summary_sents: usize,
    languages: BTreeMap<Language, LanguageAccumulator>,
    histogram: [usize; 4],
}

impl SplitAccumulator {
    fn add(&mut self, cluster: &DocumentCluster) {
        self.pairs += 1;
        self.docs += cluster.documents.len();
        for doc in &cluster.documents {
            let words = doc.token_count();
            let sents = doc.sentences.len();
            self.cluster_words += words;
            self.cluster_sents += sents;
            let acc = self.languages.entry(doc.language).or_default();
            acc.docs += 1;
            acc.words += words;
            acc.sents += sents;
        }
        self.summary_words += cluster.summary.token_count();
        self.summary_sents += cluster.summary.sentences.len();
        let span = cluster.language_count();
        if (1..=4).contains(&span) {
            self.histogram[span - 1] += 1;
        }
    }

    fn finish(self) -> SplitStats {
        let pairs = self.pairs.max(1) as f64;
        SplitStats {
            pairs: self.pairs,
            avg_docs: self.docs as f64 / pairs,
            avg_cluster_words: self.cluster_words as f64 / pairs,
            avg_cluster_sents: self.cluster_sents as f64 / pairs,
            avg_summary_words: self.summary_words as f64 / pairs,
            avg_summary_sents: self.summary_sents as f64 / pairs,
            per_language: self
                .languages
                .into_iter()
                .map(|(lang, acc)| {
                    let docs = acc.docs.max(1) as f64;
                    (
                        lang,
                        LanguageStats {
                            count: acc.docs,
                            avg_doc_words: acc.words as f64 / docs,
                            avg_doc_sents: acc.sents as f64 / docs,
                        },
                    )
                })
                .collect(),
            language_count_histogram: self.histogram,
        }
    }
}

/// Aggregate statistics over a stream of clusters. An empty stream yields
/// an empty report.
pub fn corpus_stats<'a>(clusters: impl IntoIterator<Item = &'a DocumentCluster>) -> StatsReport {
    let mut accumulators: BTreeMap<Split, SplitAccumulator> = BTreeMap::new();
    for cluster in clusters {
        accumulators.entry(cluster.split).or_default().add(cluster);
    }
    StatsReport {
        splits: accumulators
            .into_iter()
            .map(|(split, acc)| (split, acc.finish()))
            .collect(),
    }
}

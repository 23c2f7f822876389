//! Seeded synthetic corpora for offline training and pipeline tests.

use crate::text::{Document, DocumentCluster, Language, Split};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 40] = [
    "amber", "basil", "cedar", "delta", "ember", "fjord", "grove", "haven", "ivory", "juniper",
    "kelp", "lumen", "maple", "nectar", "opal", "pearl", "quartz", "raven", "sable", "tundra",
    "umber", "velvet", "willow", "xenon", "yarrow", "zephyr", "anchor", "beacon", "copper",
    "drift", "echo", "flint", "garnet", "harbor", "inlet", "jasper", "karst", "lagoon", "meadow",
    "north",
];

fn sentence(rng: &mut ChaCha8Rng, words: usize) -> String {
    let mut parts = Vec::with_capacity(words);
    for _ in 0..words {
        parts.push(WORDS[rng.random_range(0..WORDS.len())]);
    }
    let mut text = parts.join(" ");
    text.push('.');
    text
}

/// Clusters whose summaries are verbatim copies of designated source
/// sentences, so extraction has an exact learnable target. Each cluster has
/// two documents of four sentences; two sentences are planted as the
/// summary.
pub fn planted_corpus(seed: u64, n_clusters: usize) -> Vec<DocumentCluster> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_clusters)
        .map(|i| {
            let doc_texts: Vec<String> = (0..2)
                .map(|_| {
                    (0..4)
                        .map(|_| {
                            let words = rng.random_range(4..7);
                            sentence(&mut rng, words)
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let documents: Vec<Document> = doc_texts
                .iter()
                .map(|t| Document::new(Language::En, t))
                .collect();
            let total: usize = documents.iter().map(|d| d.sentences.len()).sum();
            let first = rng.random_range(0..total);
            let mut second = rng.random_range(0..total - 1);
            if second >= first {
                second += 1;
            }
            let mut planted = [first.min(second), first.max(second)];
            planted.sort_unstable();
            let flat: Vec<&str> = documents
                .iter()
                .flat_map(|d| d.sentences.iter().map(|s| s.text.as_str()))
                .collect();
            let summary_text = format!("{} {}", flat[planted[0]], flat[planted[1]]);
            DocumentCluster::new(
                format!("plant{i:03}"),
                documents,
                Document::new(Language::En, &summary_text),
                Split::Train,
            )
            .expect("synthetic clusters are well-formed")
        })
        .collect()
}

/// All-English clusters shaped like dataset-builder input.
pub fn english_corpus(seed: u64, n_clusters: usize) -> Vec<DocumentCluster> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_clusters)
        .map(|i| {
            let n_docs = rng.random_range(2..4);
            let documents: Vec<Document> = (0..n_docs)
                .map(|_| {
                    let text = (0..3)
                        .map(|_| {
                            let words = rng.random_range(5..9);
                            sentence(&mut rng, words)
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    Document::new(Language::En, &text)
                })
                .collect();
            let summary = sentence(&mut rng, 6);
            DocumentCluster::new(
                format!("en{i:03}"),
                documents,
                Document::new(Language::En, &summary),
                Split::Train,
            )
            .expect("synthetic clusters are well-formed")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_summary_copies_source_sentences() {
        for cluster in planted_corpus(7, 5) {
            let flat: Vec<&str> = cluster
                .documents
                .iter()
                .flat_map(|d| d.sentences.iter().map(|s| s.text.as_str()))
                .collect();
            assert_eq!(cluster.summary.sentences.len(), 2);
            for s in &cluster.summary.sentences {
                assert!(flat.contains(&s.text.as_str()), "{} not planted", s.text);
            }
        }
    }

    #[test]
    fn corpora_are_deterministic() {
        assert_eq!(planted_corpus(3, 4), planted_corpus(3, 4));
        assert_eq!(english_corpus(3, 4), english_corpus(3, 4));
        assert_ne!(planted_corpus(3, 4), planted_corpus(4, 4));
    }
}

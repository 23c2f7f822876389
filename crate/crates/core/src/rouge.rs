//! ROUGE-1/2/L scoring over token lists. Used both for the round-trip
//! translation thresholds in the dataset builder and for evaluation.
//!
//! N-gram overlap uses clipped (multiset-intersection) counts; ROUGE-L runs
//! a dynamic-programming LCS over flat token sequences. All scores are F1
//! with their precision/recall components.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RougeError {
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),
}

/// Precision, recall, and F1, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub const ZERO: RougeScore = RougeScore {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            precision,
            recall,
            f1,
        }
    }
}

/// ROUGE-N with clipped n-gram counts. Either side without any n-gram
/// (shorter than `n` or empty) scores zero across the board.
pub fn rouge_n<T: AsRef<str>>(
    candidate: &[T],
    reference: &[T],
    n: usize,
) -> Result<RougeScore, RougeError> {
    if n < 1 {
        return Err(RougeError::InvalidOrder(n));
    }
    let candidate_counts = ngram_counts(candidate, n);
    let reference_counts = ngram_counts(reference, n);
    let candidate_total: usize = candidate_counts.values().sum();
    let reference_total: usize = reference_counts.values().sum();
    if candidate_total == 0 || reference_total == 0 {
        return Ok(RougeScore::ZERO);
    }
    let mut overlap = 0usize;
    for (gram, count) in &candidate_counts {
        if let Some(ref_count) = reference_counts.get(gram) {
            overlap += count.min(ref_count);
        }
    }
    Ok(RougeScore::from_pr(
        overlap as f64 / candidate_total as f64,
        overlap as f64 / reference_total as f64,
    ))
}

/// ROUGE-L over flat token sequences: precision = LCS/|candidate|,
/// recall = LCS/|reference|.
pub fn rouge_l<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> RougeScore {
    if candidate.is_empty() || reference.is_empty() {
        return RougeScore::ZERO;
    }
    let lcs = lcs_length(candidate, reference);
    RougeScore::from_pr(
        lcs as f64 / candidate.len() as f64,
        lcs as f64 / reference.len() as f64,
    )
}

/// ROUGE-1 F1 on the 0-100 scale used by the dataset-construction thresholds.
pub fn rouge_1_percent<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> f64 {
    // n = 1 cannot fail
    100.0 * rouge_n(candidate, reference, 1).expect("n >= 1").f1
}

fn ngram_counts<T: AsRef<str>>(
    tokens: &[T],
    n: usize,
) -> std::collections::HashMap<Vec<&str>, usize> {
    let mut counts = std::collections::HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            let gram: Vec<&str> = window.iter().map(|t| t.as_ref()).collect();
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Longest common subsequence length by dynamic programming, O(|a|·|b|)
/// with a rolling row.
pub fn lcs_length<T: AsRef<str>>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            row[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                prev[j + 1].max(row[j])
            };
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(|t| t.to_string()).collect()
    }

    /// Brute-force LCS: enumerate every subsequence of `a` and test whether
    /// it is a subsequence of `b`. Exponential; for oracle use only.
    pub(crate) fn lcs_brute_force(a: &[String], b: &[String]) -> usize {
        let mut best = 0;
        for mask in 0u32..(1 << a.len()) {
            let picked: Vec<&String> = a
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t)
                .collect();
            if picked.len() > best && is_subsequence(&picked, b) {
                best = picked.len();
            }
        }
        best
    }

    fn is_subsequence(needle: &[&String], haystack: &[String]) -> bool {
        let mut it = haystack.iter();
        needle.iter().all(|n| it.any(|h| h == *n))
    }

    #[test]
    fn rouge_n_identical() {
        let t = toks("the cat sat");
        let s = rouge_n(&t, &t, 1).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn rouge_n_disjoint() {
        let s = rouge_n(&toks("the cat"), &toks("dog runs"), 1).unwrap();
        assert_eq!(s, RougeScore::ZERO);
    }

    #[test]
    fn rouge_n_two_thirds() {
        let s = rouge_n(&toks("a b c"), &toks("a b d"), 1).unwrap();
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rouge_n_bigrams() {
        let s = rouge_n(&toks("a b c"), &toks("a b d"), 2).unwrap();
        assert!((s.f1 - 0.5).abs() < 1e-12);
        assert!((s.precision - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rouge_n_clips_repeats() {
        // "a a a" vs "a": overlap clipped to 1
        let s = rouge_n(&toks("a a a"), &toks("a"), 1).unwrap();
        assert!((s.precision - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rouge_n_rejects_zero_order() {
        assert_eq!(
            rouge_n(&toks("a"), &toks("a"), 0).unwrap_err(),
            RougeError::InvalidOrder(0)
        );
    }

    #[test]
    fn rouge_l_identical() {
        let t = toks("a b c d");
        let s = rouge_l(&t, &t);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn rouge_l_transposition() {
        let s = rouge_l(&toks("a b c d"), &toks("a c b d"));
        assert!((s.f1 - 0.75).abs() < 1e-12);
        assert_eq!(lcs_brute_force(&toks("a b c d"), &toks("a c b d")), 3);
    }

    #[test]
    fn rouge_l_empty_candidate() {
        let s = rouge_l(&toks(""), &toks("a"));
        assert_eq!(s, RougeScore::ZERO);
    }

    #[test]
    fn percent_scale() {
        let t = toks("x y");
        assert!((rouge_1_percent(&t, &t) - 100.0).abs() < 1e-12);
        assert_eq!(rouge_1_percent(&toks("a"), &toks("b")), 0.0);
        let p = rouge_1_percent(&toks("a b c"), &toks("a b d"));
        assert!((p - 100.0 * 2.0 / 3.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn f1_symmetric_under_swap(
            a in proptest::collection::vec("[a-d]", 0..8),
            b in proptest::collection::vec("[a-d]", 0..8),
            n in 1usize..3,
        ) {
            let fwd = rouge_n(&a, &b, n).unwrap();
            let rev = rouge_n(&b, &a, n).unwrap();
            prop_assert!((fwd.f1 - rev.f1).abs() < 1e-12);
            prop_assert!((fwd.precision - rev.recall).abs() < 1e-12);
        }

        #[test]
        fn recall_monotone_in_candidate_extension(
            a in proptest::collection::vec("[a-d]", 1..6),
            b in proptest::collection::vec("[a-d]", 1..6),
        ) {
            // appending a reference token to the candidate never lowers recall
            let before = rouge_n(&a, &b, 1).unwrap().recall;
            let mut extended = a.clone();
            extended.push(b[0].clone());
            let after = rouge_n(&extended, &b, 1).unwrap().recall;
            prop_assert!(after + 1e-12 >= before);
        }

        #[test]
        fn lcs_dp_matches_brute_force(
            a in proptest::collection::vec("[a-c]", 0..8),
            b in proptest::collection::vec("[a-c]", 0..8),
        ) {
            prop_assert_eq!(lcs_length(&a, &b), lcs_brute_force(&a, &b));
        }

        #[test]
        fn rouge_l_self_is_one(a in proptest::collection::vec("[a-d]", 1..8)) {
            prop_assert!((rouge_l(&a, &a).f1 - 1.0).abs() < 1e-12);
        }
    }
}

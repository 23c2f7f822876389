//! Canonical text representations: languages, sentences, documents, and
//! document clusters, plus the tokenizer and sentence splitter shared by
//! every other module.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("unknown language code: {0:?}")]
    UnknownLanguage(String),
    #[error("unknown split name: {0:?}")]
    UnknownSplit(String),
    #[error("a document cluster must contain at least one document")]
    EmptyCluster,
    #[error("cluster summaries must be English")]
    NonEnglishSummary,
}

/// The four supported languages. Parsing any other code is an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "en")]
    En,
    #[serde(rename = "de")]
    De,
    #[serde(rename = "fr")]
    Fr,
    #[serde(rename = "es")]
    Es,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
            Language::Fr => "fr",
            Language::Es => "es",
        }
    }

    pub const ALL: [Language; 4] = [Language::En, Language::De, Language::Fr, Language::Es];
}

impl std::str::FromStr for Language {
    type Err = TextError;

    fn from_str(value: &str) -> Result<Self, Self::Err> {
        match value.to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "de" => Ok(Language::De),
            "fr" => Ok(Language::Fr),
            "es" => Ok(Language::Es),
            other => Err(TextError::UnknownLanguage(other.to_string())),
        }
    }
}

impl std::fmt::Display for Language {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// Dataset split membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split {
    #[serde(rename = "train")]
    Train,
    #[serde(rename = "valid")]
    Valid,
    #[serde(rename = "test")]
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }

    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];
}

impl std::str::FromStr for Split {
    type Err = TextError;

    fn from_str(value: &str) -> Result<Self, Self::Err> {
        match value {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(TextError::UnknownSplit(other.to_string())),
        }
    }
}

/// A single sentence with its pre-computed token list and position.
///
/// `tokens` is always exactly `tokenize(&text)`; the two are constructed
/// together and never mutated independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<String>,
    pub doc_index: usize,
    pub sent_index: usize,
}

/// One document: a language tag plus its split sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub language: Language,
    pub sentences: Vec<Sentence>,
    pub raw_text: String,
}

impl Document {
    pub fn new(language: Language, raw_text: &str) -> Self {
        Document {
            language,
            sentences: split_sentences(raw_text),
            raw_text: raw_text.to_string(),
        }
    }

    /// All tokens of the document in reading order.
    pub fn tokens(&self) -> Vec<String> {
        self.sentences
            .iter()
            .flat_map(|s| s.tokens.iter().cloned())
            .collect()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }
}

/// An ordered multilingual source-document cluster with its English summary.
///
/// Document order is stable and preserved through every pipeline stage;
/// `doc_index` on each sentence is stamped from the cluster position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentCluster {
    pub cluster_id: String,
    pub documents: Vec<Document>,
    pub summary: Document,
    pub split: Split,
}

impl DocumentCluster {
    pub fn new(
        cluster_id: impl Into<String>,
        mut documents: Vec<Document>,
        summary: Document,
        split: Split,
    ) -> Result<Self, TextError> {
        if documents.is_empty() {
            return Err(TextError::EmptyCluster);
        }
        if summary.language != Language::En {
            return Err(TextError::NonEnglishSummary);
        }
        for (doc_index, doc) in documents.iter_mut().enumerate() {
            for sentence in &mut doc.sentences {
                sentence.doc_index = doc_index;
            }
        }
        Ok(DocumentCluster {
            cluster_id: cluster_id.into(),
            documents,
            summary,
            split,
        })
    }

    /// All sentences across all documents in reading order.
    pub fn sentences(&self) -> Vec<&Sentence> {
        self.documents
            .iter()
            .flat_map(|d| d.sentences.iter())
            .collect()
    }

    pub fn sentence_count(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }

    /// Distinct languages present among the source documents.
    pub fn language_count(&self) -> usize {
        let mut langs: Vec<Language> = self.documents.iter().map(|d| d.language).collect();
        langs.sort();
        langs.dedup();
        langs.len()
    }
}

/// Lowercased maximal runs of Unicode alphanumeric characters, in order.
/// Punctuation and whitespace are discarded; digits are kept as tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            // Lowercasing can expand to multiple chars (e.g. 'İ'); keep only
            // the alphanumeric ones so re-tokenizing a token is a fixed point.
            for lower in ch.to_lowercase() {
                if lower.is_alphanumeric() {
                    current.push(lower);
                }
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Split text into sentences at '.', '!', '?' followed by whitespace or
/// end-of-text. The terminator stays with its sentence, whitespace runs are
/// collapsed, and fragments without any token are dropped. `doc_index` is
/// left at 0 for the caller to stamp.
pub fn split_sentences(raw_text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = raw_text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let push = |fragment: &[char], sentences: &mut Vec<Sentence>| {
        let text = fragment
            .iter()
            .collect::<String>()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        let tokens = tokenize(&text);
        if tokens.is_empty() {
            return;
        }
        let sent_index = sentences.len();
        sentences.push(Sentence {
            text,
            tokens,
            doc_index: 0,
            sent_index,
        });
    };
    for i in 0..chars.len() {
        let terminator = matches!(chars[i], '.' | '!' | '?');
        let boundary = i + 1 == chars.len() || chars[i + 1].is_whitespace();
        if terminator && boundary {
            push(&chars[start..=i], &mut sentences);
            start = i + 1;
        }
    }
    if start < chars.len() {
        push(&chars[start..], &mut sentences);
    }
    sentences
}

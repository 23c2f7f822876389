//! Pipeline combinators around the classic extractors: translate then
//! extract, extract then translate, and extract then abstract.

use super::{
    centroid_summarize, lexrank_summarize, mmr_summarize, textrank_summarize, BaselineError,
    ExtractiveSummary, DEFAULT_DAMPING, DEFAULT_MMR_LAMBDA, DEFAULT_SIM_THRESHOLD,
    DEFAULT_TOLERANCE,
};
use crate::dataset::TranslationBackend;
use crate::generator::{generate, ConditionalLm, DecodeMode, Vocab};
use crate::text::{tokenize, Document, DocumentCluster, Language, Sentence};

/// The classic extractors selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractorMethod {
    Centroid,
    LexRank,
    Mmr,
    TextRank,
}

impl ExtractorMethod {
    pub const ALL: [ExtractorMethod; 4] = [
        ExtractorMethod::Centroid,
        ExtractorMethod::LexRank,
        ExtractorMethod::Mmr,
        ExtractorMethod::TextRank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExtractorMethod::Centroid => "centroid",
            ExtractorMethod::LexRank => "lexrank",
            ExtractorMethod::Mmr => "mmr",
            ExtractorMethod::TextRank => "textrank",
        }
    }
}

impl std::str::FromStr for ExtractorMethod {
    type Err = BaselineError;

    fn from_str(value: &str) -> Result<Self, Self::Err> {
        match value {
            "centroid" => Ok(ExtractorMethod::Centroid),
            "lexrank" => Ok(ExtractorMethod::LexRank),
            "mmr" => Ok(ExtractorMethod::Mmr),
            "textrank" => Ok(ExtractorMethod::TextRank),
            other => Err(BaselineError::UnknownMethod(other.to_string())),
        }
    }
}

/// Run the named extractor with its default parameters.
pub fn extract_with(
    method: ExtractorMethod,
    cluster: &DocumentCluster,
    budget: usize,
) -> Result<ExtractiveSummary, BaselineError> {
    match method {
        ExtractorMethod::Centroid => centroid_summarize(cluster, budget),
        ExtractorMethod::LexRank => lexrank_summarize(
            cluster,
            budget,
            DEFAULT_SIM_THRESHOLD,
            DEFAULT_DAMPING,
            DEFAULT_TOLERANCE,
        ),
        ExtractorMethod::Mmr => mmr_summarize(cluster, budget, DEFAULT_MMR_LAMBDA),
        ExtractorMethod::TextRank => {
            textrank_summarize(cluster, budget, DEFAULT_DAMPING, DEFAULT_TOLERANCE)
        }
    }
}

/// Translate every non-English document into English sentence by sentence
/// (keeping the sentence structure intact so indices stay aligned with the
/// original cluster), then run the named extractor.
pub fn translate_then_extract(
    cluster: &DocumentCluster,
    budget: usize,
    method: ExtractorMethod,
    backend: &dyn TranslationBackend,
) -> Result<ExtractiveSummary, BaselineError> {
    let translated = translate_cluster_to_english(cluster, backend)?;
    extract_with(method, &translated, budget)
}

/// Extract from the untranslated mixed-language cluster, then translate the
/// selected sentences into English and join them in position order.
pub fn extract_then_translate(
    cluster: &DocumentCluster,
    budget: usize,
    method: ExtractorMethod,
    backend: &dyn TranslationBackend,
) -> Result<String, BaselineError> {
    let summary = extract_with(method, cluster, budget)?;
    let mut parts = Vec::with_capacity(summary.selected.len());
    for &(doc, sent) in &summary.selected {
        let document = &cluster.documents[doc];
        let text = &document.sentences[sent].text;
        if document.language == Language::En {
            parts.push(text.clone());
        } else {
            parts.push(backend.translate(text, document.language, Language::En)?);
        }
    }
    Ok(parts.join(" "))
}

/// Extract key sentences with a classic extractor, then hand them as
/// snippets to any conditional language model for abstractive generation.
pub fn extract_then_abstract(
    cluster: &DocumentCluster,
    budget: usize,
    method: ExtractorMethod,
    lm: &dyn ConditionalLm,
    vocab: &Vocab,
    max_len: usize,
) -> Result<String, BaselineError> {
    let summary = extract_with(method, cluster, budget)?;
    let snippets: Vec<Vec<usize>> = summary
        .selected
        .iter()
        .map(|&(doc, sent)| vocab.encode(&cluster.documents[doc].sentences[sent].tokens))
        .collect();
    let ids = generate(lm, &snippets, max_len, DecodeMode::Greedy)?;
    Ok(vocab.decode(&ids).join(" "))
}

fn translate_cluster_to_english(
    cluster: &DocumentCluster,
    backend: &dyn TranslationBackend,
) -> Result<DocumentCluster, BaselineError> {
    let mut documents = Vec::with_capacity(cluster.documents.len());
    for doc in &cluster.documents {
        if doc.language == Language::En {
            documents.push(doc.clone());
            continue;
        }
        let mut sentences = Vec::with_capacity(doc.sentences.len());
        for sentence in &doc.sentences {
            let raw = backend.translate(&sentence.text, doc.language, Language::En)?;
            let text = raw.split_whitespace().collect::<Vec<_>>().join(" ");
            let tokens = tokenize(&text);
            if tokens.is_empty() {
                // keep the original so sentence indices stay valid
                sentences.push(sentence.clone());
            } else {
                sentences.push(Sentence {
                    text,
                    tokens,
                    doc_index: sentence.doc_index,
                    sent_index: sentence.sent_index,
                });
            }
        }
        let raw_text = sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        documents.push(Document {
            language: Language::En,
            sentences,
            raw_text,
        });
    }
    DocumentCluster::new(
        cluster.cluster_id.clone(),
        documents,
        cluster.summary.clone(),
        cluster.split,
    )
    .map_err(|_| BaselineError::EmptyCluster)
}

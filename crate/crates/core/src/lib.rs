//! Mixed-language multi-document summarization toolkit: dataset
//! construction via round-trip translation scoring and greedy language
//! assignment, ROUGE scoring, classic extractive baselines, and a
//! graph-based extract-generate model trainable at desk scale.

pub mod baselines;
pub mod dataset;
pub mod extractor;
pub mod generator;
pub mod graph;
pub mod model;
pub mod nn;
pub mod rouge;
pub mod synthetic;
pub mod text;

#[cfg(test)]
mod tests {
    /// Every shared value type is immutable after construction and safe to
    /// hand across threads; the translation cache is additionally safe for
    /// concurrent readers and writers.
    #[test]
    fn shared_types_are_send_and_sync() {
        fn check<T: Send + Sync>() {}
        check::<crate::text::DocumentCluster>();
        check::<crate::rouge::RougeScore>();
        check::<crate::graph::HomogeneousGraph>();
        check::<crate::graph::HeterogeneousGraph>();
        check::<crate::graph::HashEmbedder>();
        check::<crate::nn::Tensor>();
        check::<crate::nn::ParamSet>();
        check::<crate::dataset::ScoreMatrix>();
        check::<crate::dataset::CachedBackend<crate::dataset::MockBackend>>();
        check::<crate::dataset::CachedBackend<crate::dataset::HttpBackend>>();
        check::<crate::model::SummarizationModel>();
    }
}

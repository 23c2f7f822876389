//! `mixsum stats`: the full statistics table plus the language-count
//! histogram, with an optional JSON dump.

use super::load_clusters;
use crate::error::CliError;
use crate::manifest::ManifestLogger;
use mixsum_core::dataset::{corpus_stats, StatsReport};
use mixsum_core::text::{Language, Split};
use std::path::Path;

pub fn run(input: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let clusters = load_clusters(input)?;
    let report = corpus_stats(clusters.iter());
    print!("{}", render_table(&report));
    if let Some(output) = output {
        let logger = ManifestLogger::start("stats", serde_json::Value::Null, 0, &[input]);
        let body = serde_json::to_vec_pretty(&report)
            .map_err(|e| CliError::Input(format!("serialize report: {e}")))?;
        std::fs::write(output, body)?;
        logger.finish(output)?;
    }
    Ok(())
}

/// Fixed-width table with one column per split. Every split and language
/// is always shown; absent combinations print zero.
pub fn render_table(report: &StatsReport) -> String {
    let mut out = String::new();
    let header = format!(
        "{:<22}{:>12}{:>12}{:>12}\n",
        "metric", "train", "valid", "test"
    );
    out.push_str(&header);

    let int_row = |name: &str, pick: &dyn Fn(Split) -> usize| {
        let mut row = format!("{name:<22}");
        for split in Split::ALL {
            row.push_str(&format!("{:>12}", pick(split)));
        }
        row.push('\n');
        row
    };
    let float_row = |name: &str, pick: &dyn Fn(Split) -> f64| {
        let mut row = format!("{name:<22}");
        for split in Split::ALL {
            row.push_str(&format!("{:>12.2}", pick(split)));
        }
        row.push('\n');
        row
    };

    out.push_str(&int_row("pairs", &|s| {
        report.split(s).map_or(0, |x| x.pairs)
    }));
    out.push_str(&float_row("avg_docs", &|s| {
        report.split(s).map_or(0.0, |x| x.avg_docs)
    }));
    out.push_str(&float_row("avg_cluster_words", &|s| {
        report.split(s).map_or(0.0, |x| x.avg_cluster_words)
    }));
    out.push_str(&float_row("avg_cluster_sents", &|s| {
        report.split(s).map_or(0.0, |x| x.avg_cluster_sents)
    }));
    out.push_str(&float_row("avg_summary_words", &|s| {
        report.split(s).map_or(0.0, |x| x.avg_summary_words)
    }));
    out.push_str(&float_row("avg_summary_sents", &|s| {
        report.split(s).map_or(0.0, |x| x.avg_summary_sents)
    }));

    for lang in Language::ALL {
        let code = lang.code();
        out.push_str(&int_row(&format!("{code}_count"), &|s| {
            report
                .split(s)
                .and_then(|x| x.per_language.get(&lang))
                .map_or(0, |l| l.count)
        }));
        out.push_str(&float_row(&format!("{code}_avg_doc_words"), &|s| {
            report
                .split(s)
                .and_then(|x| x.per_language.get(&lang))
                .map_or(0.0, |l| l.avg_doc_words)
        }));
        out.push_str(&float_row(&format!("{code}_avg_doc_sents"), &|s| {
            report
                .split(s)
                .and_then(|x| x.per_language.get(&lang))
                .map_or(0.0, |l| l.avg_doc_sents)
        }));
    }

    for n in 1..=4usize {
        let name = if n == 1 {
            "clusters_1_language".to_string()
        } else {
            format!("clusters_{n}_languages")
        };
        out.push_str(&int_row(&name, &|s| {
            report
                .split(s)
                .map_or(0, |x| x.language_count_histogram[n - 1])
        }));
    }
    out
}

use std::path::PathBuf;

use anyhow::Result;
use forge_core::corpus_io::{read_corpus, tokenizer_by_name, write_shards, Document, ShardManifest};
use forge_core::mixture::CorpusIndex;
use forge_core::packer::parse_count;
use forge_core::stats::{default_bin_edges, length_histogram, long_fraction, CorpusStats, DomainMixture};
use forge_core::Error;
use serde_json::json;

use super::{require, write_json, write_text, Ctx};
use crate::args::{IngestArgs, StatsArgs};

/// Expand glob patterns; plain paths pass through. Results keep argument
/// order, with each pattern's matches sorted.
fn expand_inputs(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in patterns {
        let path = PathBuf::from(p);
        if path.exists() {
            out.push(path);
            continue;
        }
        let mut matches: Vec<PathBuf> = glob::glob(p)
            .map_err(|e| Error::invalid("input pattern", format!("{p}: {e}")))?
            .collect::<Result<_, _>>()?;
        if matches.is_empty() {
            require(&path)?;
        }
        matches.sort();
        out.extend(matches);
    }
    Ok(out)
}

pub fn ingest(ctx: &Ctx, a: IngestArgs) -> Result<()> {
    let inputs = expand_inputs(&a.inputs)?;
    let tokenizer = tokenizer_by_name(&a.tokenizer)?;
    let shard_tokens = parse_count(&a.shard_tokens, true)?;
    let mut reader = read_corpus(&inputs, tokenizer.as_deref());
    let docs: Vec<Document> = reader.by_ref().collect::<forge_core::Result<_>>()?;
    let read = reader.stats();
    if read.skipped_empty > 0 {
        log::warn!("skipped {} empty documents", read.skipped_empty);
    }
    if read.unknown_fields > 0 {
        log::warn!("ignored {} unknown fields", read.unknown_fields);
    }
    let name = tokenizer.as_ref().map(|t| t.name().to_owned());
    let manifest = write_shards(docs, shard_tokens, &a.out, name.as_deref(), ctx.exec)?;
    log::info!(
        "wrote {} documents, {} tokens in {} shards",
        manifest.total_documents,
        manifest.total_tokens,
        manifest.shards.len()
    );
    let mut rec = ctx.record("ingest").config(&json!({
        "tokenizer": a.tokenizer,
        "shard_tokens": shard_tokens,
        "skipped_empty": read.skipped_empty,
        "unknown_fields": read.unknown_fields,
    }))?;
    for p in &inputs {
        rec = rec.input("corpus", p)?;
    }
    rec.write(&a.out)
}

pub fn stats(ctx: &Ctx, a: StatsArgs) -> Result<()> {
    require(&a.manifest)?;
    let manifest = ShardManifest::load(&a.manifest)?;
    let index = CorpusIndex::from_manifest(&manifest)?;
    let docs = &index.entries;
    let stats = CorpusStats::collect(docs, a.long_threshold, ctx.exec);
    let mixture = DomainMixture::from_stats(&stats)?;
    let edges = a.edges.clone().unwrap_or_else(default_bin_edges);
    let hist = length_histogram(docs, &edges, ctx.exec)?;
    let long = long_fraction(docs, a.long_threshold, ctx.exec);

    super::create_dir(&a.out)?;
    write_text(&a.out.join("stats.csv"), stats.to_csv())?;
    write_json(&a.out.join("domain_mixture.json"), &mixture)?;
    write_json(&a.out.join("long_fraction.json"), &long)?;
    write_text(&a.out.join("histogram.csv"), hist.to_csv())?;
    write_text(&a.out.join("histogram.svg"), hist.to_svg())?;

    let total = stats.total();
    println!(
        "documents {} tokens {} long_doc_fraction {:.4} long_token_fraction {:.4}",
        total.doc_count,
        total.token_count,
        total.long_doc_fraction().unwrap_or(0.0),
        total.long_token_fraction().unwrap_or(0.0)
    );
    ctx.record("stats")
        .config(&json!({ "long_threshold": a.long_threshold, "edges": edges }))?
        .input("manifest", &a.manifest)?
        .write(&a.out)
}

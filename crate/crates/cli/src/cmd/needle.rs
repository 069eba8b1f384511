use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use forge_core::corpus_io::{tokenizer_by_name, Document, ShardManifest, Tokenizer};
use forge_core::jsonl::{read_jsonl, write_jsonl};
use forge_core::needle::{aggregate_heatmap, generate_grid, score_transcripts, CaseMeta, NeedleSpec, ScoredCase, Transcript};
use forge_core::packer::parse_count;
use forge_core::report::render_heatmap;
use forge_core::Error;
use serde_json::json;

use super::{read_text, require, write_json, Ctx};
use crate::args::{NeedleCommand, NeedleGenArgs, NeedleReportArgs, NeedleScoreArgs};

pub const CASES_FILE: &str = "cases.jsonl";
pub const SCORES_FILE: &str = "scores.jsonl";

pub fn run(ctx: &Ctx, cmd: NeedleCommand) -> Result<()> {
    match cmd {
        NeedleCommand::Gen(a) => gen(ctx, a),
        NeedleCommand::Score(a) => score(ctx, a),
        NeedleCommand::Report(a) => report(ctx, a),
    }
}

fn text_tokenizer(name: &str) -> Result<Box<dyn Tokenizer>> {
    tokenizer_by_name(name)?
        .ok_or_else(|| Error::invalid("tokenizer", "needle prompts need a text tokenizer, not pretokenized").into())
}

fn parent_dir(p: &Path) -> PathBuf {
    p.parent()
        .filter(|d| !d.as_os_str().is_empty())
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn gen(ctx: &Ctx, a: NeedleGenArgs) -> Result<()> {
    let spec: NeedleSpec = match &a.spec {
        Some(p) => {
            require(p)?;
            toml::from_str(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?
        }
        None => NeedleSpec::default(),
    };
    spec.validate()?;
    require(&a.filler)?;
    let manifest = ShardManifest::load(&a.filler)?;
    let name = a
        .tokenizer
        .clone()
        .or_else(|| manifest.tokenizer.clone())
        .ok_or_else(|| Error::invalid("tokenizer", "filler manifest records no tokenizer; pass --tokenizer"))?;
    let tok = text_tokenizer(&name)?;
    // Re-encode filler text with the chosen tokenizer so ids (and decoding)
    // are consistent with the needle; token-only records are used as stored.
    let filler: Vec<Document> = manifest
        .documents()
        .map(|d| {
            d.map(|mut d| {
                if d.text.is_some() {
                    d.tokens = None;
                }
                d
            })
        })
        .collect::<forge_core::Result<_>>()?;
    let mut cases = generate_grid(&spec, &filler, tok.as_ref(), ctx.exec)?;
    if a.with_text {
        for c in &mut cases {
            c.prompt_text = Some(tok.decode(&c.prompt_tokens));
        }
    }
    super::create_dir(&a.out)?;
    write_jsonl(&a.out.join(CASES_FILE), &cases)?;
    write_json(&a.out.join("needle_spec.json"), &spec)?;
    println!("cases {} ({} lengths x {} depths)", cases.len(), spec.lengths.len(), spec.depths.len());
    ctx.record("needle gen")
        .config(&json!({ "spec": spec, "tokenizer": name, "with_text": a.with_text }))?
        .input("filler", &a.filler)?
        .write(&a.out)
}

fn score(ctx: &Ctx, a: NeedleScoreArgs) -> Result<()> {
    let cases_path = if a.cases.is_dir() { a.cases.join(CASES_FILE) } else { a.cases.clone() };
    require(&cases_path)?;
    require(&a.responses)?;
    let tok = text_tokenizer(&a.tokenizer)?;
    let cases: Vec<CaseMeta> = read_jsonl(&cases_path)?;
    let transcripts: Vec<Transcript> = read_jsonl(&a.responses)?;
    let scored = score_transcripts(&cases, &transcripts, tok.as_ref(), ctx.exec)?;
    let out = a.out.clone().unwrap_or_else(|| parent_dir(&a.responses));
    super::create_dir(&out)?;
    write_jsonl(&out.join(SCORES_FILE), &scored)?;
    let mean = scored.iter().map(|s| s.score).sum::<f64>() / scored.len().max(1) as f64;
    println!("scored {} mean {:.4}", scored.len(), mean);
    ctx.record("needle score")
        .config(&json!({ "tokenizer": a.tokenizer }))?
        .input("cases", &cases_path)?
        .input("responses", &a.responses)?
        .write(&out)
}

fn report(ctx: &Ctx, a: NeedleReportArgs) -> Result<()> {
    require(&a.scores)?;
    let scored: Vec<ScoredCase> = read_jsonl(&a.scores)?;
    let grid = aggregate_heatmap(&scored)?;
    let train_len = a.train_len.as_deref().map(|s| parse_count(s, true)).transpose()?;
    let out = a.out.clone().unwrap_or_else(|| parent_dir(&a.scores));
    let files = render_heatmap(&grid, a.green_threshold, train_len, &out, "heatmap")?;
    write_json(&out.join("heatmap.json"), &grid)?;
    println!("mean {:.1}", grid.mean * 100.0);
    log::info!("wrote {} and {}", files.csv.display(), files.svg.display());
    ctx.record("needle report")
        .config(&json!({ "green_threshold": a.green_threshold, "train_len": train_len }))?
        .input("scores", &a.scores)?
        .write(&out)
}

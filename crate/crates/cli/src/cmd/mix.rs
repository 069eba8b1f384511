use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use forge_core::corpus_io::ShardManifest;
use forge_core::mixture::{build_mixture, verify_mixture, Boost, CorpusIndex, MixtureSpec, SampledDataset, Tolerances};
use forge_core::packer::{parse_count, PackInput, Packer};
use forge_core::{Error, EOT_TOKEN};
use serde_json::json;

use super::{read_text, require, write_json, write_text, Ctx};
use crate::args::{AuditArgs, MixArgs, PackArgs};
use crate::runlog::RunRecord;

pub const CHUNKS_FILE: &str = "chunks.jsonl";
pub const PACK_REPORT_FILE: &str = "pack_report.json";

/// Config file fields, then flags, then the global seed.
fn resolve_spec(ctx: &Ctx, a: &MixArgs) -> Result<MixtureSpec> {
    let mut table: toml::Table = match &a.config {
        Some(p) => {
            require(p)?;
            toml::from_str(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?
        }
        None => toml::Table::new(),
    };
    let mut set = |k: &str, v: toml::Value| {
        table.insert(k.to_owned(), v);
    };
    if let Some(s) = &a.strategy {
        set("strategy", s.clone().into());
    }
    if let Some(b) = &a.budget {
        set("token_budget", (parse_count(b, false)? as i64).into());
    }
    if let Some(f) = a.target_long_fraction {
        set("target_long_fraction", f.into());
    }
    if let Some(t) = a.long_threshold {
        set("long_threshold", (t as i64).into());
    }
    if let Some(c) = a.cut_len {
        set("cut_len", (c as i64).into());
    }
    if let Some(b) = &a.long_basis {
        set("long_basis", b.clone().into());
    }
    if !a.boost.is_empty() {
        set("boosted_domains", toml::Value::Array(a.boost.iter().cloned().map(Into::into).collect()));
    }
    if let Some(seed) = ctx.seed {
        set("seed", (seed as i64).into());
    }
    if !table.contains_key("seed") {
        log::warn!("no seed given; using 0");
        table.insert("seed".into(), 0i64.into());
    }
    let spec: MixtureSpec = table.try_into().context("invalid mixture recipe")?;
    if let Some(Boost::Names(n)) = &spec.boosted_domains {
        log::debug!("boosting {n:?}");
    }
    spec.validate()?;
    Ok(spec)
}

pub fn mix(ctx: &Ctx, a: MixArgs) -> Result<()> {
    require(&a.manifest)?;
    let spec = resolve_spec(ctx, &a)?;
    let manifest = ShardManifest::load(&a.manifest)?;
    let index = CorpusIndex::from_manifest(&manifest)?;
    let ds = build_mixture(&index, &spec, ctx.exec)?;
    for w in &ds.warnings {
        log::warn!("{w}");
    }
    ds.write(&a.out)?;
    let overall = ds.overall();
    println!(
        "draws {} tokens {} long_token_fraction {:.4}",
        overall.draws,
        overall.tokens(),
        overall.long_token_fraction().unwrap_or(0.0)
    );
    ctx.record("mix")
        .config(&spec)?
        .input("manifest", &a.manifest)?
        .write(&a.out)
}

pub fn audit(ctx: &Ctx, a: AuditArgs) -> Result<()> {
    require(&a.dataset)?;
    let ds = SampledDataset::load(&a.dataset)?;
    let tol = Tolerances {
        share_tol: a.share_tol,
        long_tol: a.long_tol,
    };
    let report = verify_mixture(&ds, tol);
    let out = a.out.clone().unwrap_or_else(|| a.dataset.clone());
    super::create_dir(&out)?;
    write_text(&out.join("audit.csv"), report.to_csv())?;
    write_json(&out.join("audit.json"), &report)?;
    if a.out.is_some() {
        ctx.record("audit").config(&tol)?.input("dataset", &a.dataset)?.write(&out)?;
    }
    let failed: Vec<&str> = report
        .rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.domain.as_str())
        .collect();
    if report.pass {
        println!("audit pass ({} domains)", report.rows.len());
        Ok(())
    } else {
        println!("audit FAIL: {}", failed.join(", "));
        Err(Error::invalid("mixture", format!("audit failed for {}", failed.join(", "))).into())
    }
}

fn parse_separator(s: &str) -> Result<Option<u32>> {
    match s {
        "eot" => Ok(Some(EOT_TOKEN)),
        "none" => Ok(None),
        n => Ok(Some(n.parse().map_err(|_| {
            Error::invalid("separator", format!("{n:?} is not eot, none or a token id"))
        })?)),
    }
}

fn manifest_for(a: &PackArgs) -> Result<PathBuf> {
    if let Some(m) = &a.manifest {
        return Ok(m.clone());
    }
    let rec = RunRecord::load(&a.dataset).context("no --manifest given and no run.json in the dataset directory")?;
    rec.input_path("manifest")
        .map(Path::to_path_buf)
        .ok_or_else(|| Error::invalid("dataset", "run.json records no manifest; pass --manifest").into())
}

pub fn pack(ctx: &Ctx, a: PackArgs) -> Result<()> {
    require(&a.dataset)?;
    let ds = SampledDataset::load(&a.dataset)?;
    let manifest_path = manifest_for(&a)?;
    require(&manifest_path)?;
    let manifest = ShardManifest::load(&manifest_path)?;
    if manifest.content_digest != ds.corpus_digest {
        return Err(Error::invalid(
            "manifest",
            format!("{} is not the corpus this dataset was sampled from", manifest_path.display()),
        )
        .into());
    }
    let chunk_len = parse_count(&a.chunk_len, true)?;
    let separator = parse_separator(&a.separator)?;

    let wanted: std::collections::HashSet<&str> = ds.draws.iter().map(|d| d.id.as_str()).collect();
    let mut tokens: HashMap<String, Vec<u32>> = HashMap::new();
    for doc in manifest.documents() {
        let doc = doc?;
        if wanted.contains(doc.id.as_str()) {
            let t = doc.tokens.unwrap_or_default();
            tokens.insert(doc.id, t);
        }
    }

    super::create_dir(&a.out)?;
    let path = a.out.join(CHUNKS_FILE);
    let io = |e: std::io::Error| Error::Io {
        path: path.clone(),
        source: e,
    };
    let mut w = BufWriter::new(File::create(&path).map_err(io)?);
    let mut packer = Packer::new(chunk_len, separator)?;
    for d in &ds.draws {
        let doc = tokens
            .get(&d.id)
            .ok_or_else(|| Error::invalid("dataset", format!("document {} not in the manifest", d.id)))?;
        let span = doc
            .get(d.start as usize..d.end as usize)
            .ok_or_else(|| Error::invalid("dataset", format!("span {}..{} outside document {}", d.start, d.end, d.id)))?;
        for chunk in packer.push(PackInput {
            id: &d.id,
            repeat: d.repeat,
            start: d.start,
            tokens: span,
        }) {
            serde_json::to_writer(&mut w, &chunk)?;
            w.write_all(b"\n").map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    let report = packer.finish();
    write_json(&a.out.join(PACK_REPORT_FILE), &report)?;
    println!(
        "chunks {} chunk_len {} dropped_tokens {}",
        report.n_chunks, report.chunk_len, report.dropped_tokens
    );
    ctx.record("pack")
        .config(&json!({ "chunk_len": chunk_len, "separator": separator }))?
        .input("dataset", &a.dataset)?
        .input("manifest", &manifest_path)?
        .write(&a.out)
}

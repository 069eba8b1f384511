use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus_io::{read_corpus, CorpusReader, Document, Tokenizer};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardEntry {
    /// File name relative to the manifest's directory.
    pub path: String,
    pub documents: u64,
    pub tokens: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardManifest {
    pub shards: Vec<ShardEntry>,
    pub total_documents: u64,
    pub total_tokens: u64,
    /// sha256 over every shard's bytes, in shard order.
    pub content_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokenizer: Option<String>,
    #[serde(skip)]
    root: PathBuf,
}

impl ShardManifest {
    /// Load `manifest.json` (or the manifest inside a directory).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut path = path.as_ref().to_path_buf();
        if path.is_dir() {
            path = path.join(MANIFEST_FILE);
        }
        let raw = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut manifest: ShardManifest = serde_json::from_str(&raw)?;
        manifest.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let sum: u64 = manifest.shards.iter().map(|s| s.tokens).sum();
        if sum != manifest.total_tokens {
            return Err(Error::invalid(
                "manifest",
                format!("shard tokens sum to {sum}, manifest says {}", manifest.total_tokens),
            ));
        }
        Ok(manifest)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn shard_paths(&self) -> Vec<PathBuf> {
        self.shards.iter().map(|s| self.root.join(&s.path)).collect()
    }

    /// Stream the sharded documents back. Shards always carry token ids, so
    /// no tokenizer is needed.
    pub fn documents(&self) -> CorpusReader<'static> {
        read_corpus(&self.shard_paths(), None)
    }

    /// Same as [`ShardManifest::documents`] but with a tokenizer for text-only
    /// records written by other tools.
    pub fn documents_with<'a>(&self, tokenizer: &'a dyn Tokenizer) -> CorpusReader<'a> {
        read_corpus(&self.shard_paths(), Some(tokenizer))
    }
}

/// Write documents into `shard-NNNNN.jsonl` files holding at most
/// `max_tokens_per_shard` tokens each, plus `manifest.json`.
///
/// Document-to-shard assignment is a sequential greedy pass; only the
/// serialization of finished shards runs in parallel.
pub fn write_shards<I>(
    docs: I,
    max_tokens_per_shard: u64,
    out_dir: impl AsRef<Path>,
    tokenizer_name: Option<&str>,
    exec: Execution,
) -> Result<ShardManifest>
where
    I: IntoIterator<Item = Document>,
{
    let out_dir = out_dir.as_ref();
    let docs: Vec<Document> = docs.into_iter().collect();
    if let Some(big) = docs.iter().find(|d| d.token_count > max_tokens_per_shard) {
        return Err(Error::OversizeDocument {
            id: big.id.clone(),
            tokens: big.token_count,
            limit: max_tokens_per_shard,
        });
    }

    let mut ranges: Vec<(usize, usize)> = Vec::new();
    let (mut start, mut used) = (0usize, 0u64);
    for (i, doc) in docs.iter().enumerate() {
        if i > start && used + doc.token_count > max_tokens_per_shard {
            ranges.push((start, i));
            start = i;
            used = 0;
        }
        used += doc.token_count;
    }
    if start < docs.len() {
        ranges.push((start, docs.len()));
    }

    let bodies: Vec<Result<Vec<u8>>> = exec::map(exec, &ranges, |&(a, b)| {
        let mut buf = Vec::new();
        for doc in &docs[a..b] {
            serde_json::to_writer(&mut buf, doc)?;
            buf.push(b'\n');
        }
        Ok(buf)
    });

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut digest = Sha256::new();
    let mut shards = Vec::with_capacity(ranges.len());
    for (idx, (body, &(a, b))) in bodies.into_iter().zip(&ranges).enumerate() {
        let body = body?;
        let name = format!("shard-{idx:05}.jsonl");
        let path = out_dir.join(&name);
        fs::write(&path, &body).map_err(|e| Error::io(&path, e))?;
        digest.update(&body);
        shards.push(ShardEntry {
            path: name,
            documents: (b - a) as u64,
            tokens: docs[a..b].iter().map(|d| d.token_count).sum(),
            sha256: hex::encode(Sha256::digest(&body)),
        });
    }

    let manifest = ShardManifest {
        total_documents: docs.len() as u64,
        total_tokens: shards.iter().map(|s| s.tokens).sum(),
        shards,
        content_digest: hex::encode(digest.finalize()),
        tokenizer: tokenizer_name.map(str::to_owned),
        root: out_dir.to_path_buf(),
    };
    let path = out_dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(i: usize, n: u32) -> Document {
        Document::from_tokens(format!("d{i}"), "C4", (0..n).collect())
    }

    #[test]
    fn greedy_close_rule() {
        let dir = tempfile::tempdir().unwrap();
        let docs = vec![doc(0, 5), doc(1, 5), doc(2, 5)];
        let m = write_shards(docs, 10, dir.path(), None, Execution::Sequential).unwrap();
        let counts: Vec<u64> = m.shards.iter().map(|s| s.documents).collect();
        assert_eq!(counts, [2, 1]);
        assert_eq!(m.total_tokens, 15);
    }

    #[test]
    fn empty_stream() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_shards(Vec::new(), 10, dir.path(), None, Execution::Sequential).unwrap();
        assert!(m.shards.is_empty());
        assert_eq!(m.total_tokens, 0);
        assert!(ShardManifest::load(dir.path()).unwrap().shards.is_empty());
    }

    #[test]
    fn oversize_document_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_shards(vec![doc(0, 3), doc(7, 11)], 10, dir.path(), None, Execution::Sequential)
            .unwrap_err();
        assert!(err.to_string().contains("d7"));
    }

    #[test]
    fn unwritable_directory() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, b"x").unwrap();
        let err = write_shards(vec![doc(0, 1)], 10, blocker.join("sub"), None, Execution::Sequential)
            .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn round_trip_and_manifest_load() {
        let dir = tempfile::tempdir().unwrap();
        let docs: Vec<Document> = (0..20).map(|i| doc(i, (i % 7 + 1) as u32)).collect();
        let m = write_shards(docs.clone(), 9, dir.path(), Some("bytes"), Execution::Parallel).unwrap();
        let loaded = ShardManifest::load(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(loaded, m);
        let back: Vec<Document> = loaded.documents().collect::<Result<_>>().unwrap();
        assert_eq!(back, docs);
    }
}

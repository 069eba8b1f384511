use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus_io::{Document, ShardManifest};
use crate::error::Result;
use crate::stats::DomainLength;

/// Id, domain and length of one corpus document. Sampling only needs these.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub domain: String,
    pub token_count: u64,
}

impl DomainLength for IndexEntry {
    fn domain(&self) -> &str {
        &self.domain
    }
    fn token_count(&self) -> u64 {
        self.token_count
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusIndex {
    pub entries: Vec<IndexEntry>,
    /// Identifies the corpus contents; recorded in every sampled dataset.
    pub digest: String,
}

impl CorpusIndex {
    pub fn new(entries: Vec<IndexEntry>) -> Self {
        let mut h = Sha256::new();
        for e in &entries {
            h.update(e.id.as_bytes());
            h.update([0]);
            h.update(e.domain.as_bytes());
            h.update([0]);
            h.update(e.token_count.to_le_bytes());
        }
        CorpusIndex {
            entries,
            digest: hex::encode(h.finalize()),
        }
    }

    pub fn from_documents(docs: &[Document]) -> Self {
        Self::new(
            docs.iter()
                .map(|d| IndexEntry {
                    id: d.id.clone(),
                    domain: d.domain.clone(),
                    token_count: d.token_count,
                })
                .collect(),
        )
    }

    /// Index a sharded corpus; the digest is the manifest's content digest.
    pub fn from_manifest(manifest: &ShardManifest) -> Result<Self> {
        let mut entries = Vec::with_capacity(manifest.total_documents as usize);
        for doc in manifest.documents() {
            let doc = doc?;
            entries.push(IndexEntry {
                id: doc.id,
                domain: doc.domain,
                token_count: doc.token_count,
            });
        }
        Ok(CorpusIndex {
            entries,
            digest: manifest.content_digest.clone(),
        })
    }
}

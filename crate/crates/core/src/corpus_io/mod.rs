//! Domain-tagged corpus ingestion, tokenizer adapters and sharded output.

mod document;
mod reader;
mod shards;
mod tokenizer;

pub use document::Document;
pub use reader::{read_corpus, CorpusReader, ReadStats};
pub use shards::{write_shards, ShardEntry, ShardManifest, MANIFEST_FILE};
pub use tokenizer::{tokenizer_by_name, ByteTokenizer, Tokenizer, WhitespaceTokenizer};

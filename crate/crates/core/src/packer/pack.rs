use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a run of chunk positions came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpanSource {
    /// Tokens `[start, end)` of a source document.
    Doc {
        id: String,
        repeat: u32,
        start: u64,
        end: u64,
    },
    Separator,
}

/// Positions `[chunk_start, chunk_end)` of a chunk and their origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceSpan {
    pub chunk_start: u32,
    pub chunk_end: u32,
    #[serde(flatten)]
    pub source: SpanSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedChunk {
    pub chunk_index: u64,
    pub tokens: Vec<u32>,
    pub provenance: Vec<ProvenanceSpan>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackReport {
    pub chunk_len: u64,
    pub n_chunks: u64,
    pub dropped_tokens: u64,
    /// Concatenated stream length, separators included.
    pub total_tokens: u64,
    pub documents: u64,
}

/// One document (or document span) to pack.
#[derive(Clone, Copy, Debug)]
pub struct PackInput<'a> {
    pub id: &'a str,
    pub repeat: u32,
    /// Offset of `tokens[0]` inside the source document.
    pub start: u64,
    pub tokens: &'a [u32],
}

/// Streaming packer: concatenates documents (with an optional separator
/// token between consecutive documents) and cuts the stream into chunks of
/// exactly `chunk_len`. The trailing partial chunk is dropped by `finish`.
pub struct Packer {
    chunk_len: usize,
    separator: Option<u32>,
    tokens: Vec<u32>,
    spans: Vec<ProvenanceSpan>,
    report: PackReport,
}

impl Packer {
    pub fn new(chunk_len: u64, separator: Option<u32>) -> Result<Self> {
        if chunk_len == 0 || chunk_len > u64::from(u32::MAX) {
            return Err(Error::invalid("chunk_len", format!("must be in 1..=2^32-1, got {chunk_len}")));
        }
        Ok(Packer {
            chunk_len: chunk_len as usize,
            separator,
            tokens: Vec::with_capacity(chunk_len as usize),
            spans: Vec::new(),
            report: PackReport {
                chunk_len,
                ..Default::default()
            },
        })
    }

    fn put(&mut self, piece: &[u32], source: SpanSource, out: &mut Vec<PackedChunk>) {
        let mut piece = piece;
        let mut offset = 0u64;
        while !piece.is_empty() {
            let room = self.chunk_len - self.tokens.len();
            let take = room.min(piece.len());
            let at = self.tokens.len() as u32;
            self.tokens.extend_from_slice(&piece[..take]);
            let source = match &source {
                SpanSource::Doc { id, repeat, start, .. } => SpanSource::Doc {
                    id: id.clone(),
                    repeat: *repeat,
                    start: start + offset,
                    end: start + offset + take as u64,
                },
                SpanSource::Separator => SpanSource::Separator,
            };
            self.spans.push(ProvenanceSpan {
                chunk_start: at,
                chunk_end: at + take as u32,
                source,
            });
            offset += take as u64;
            piece = &piece[take..];
            if self.tokens.len() == self.chunk_len {
                out.push(PackedChunk {
                    chunk_index: self.report.n_chunks,
                    tokens: std::mem::replace(&mut self.tokens, Vec::with_capacity(self.chunk_len)),
                    provenance: std::mem::take(&mut self.spans),
                });
                self.report.n_chunks += 1;
            }
        }
    }

    /// Append one document; returns the chunks it completed.
    pub fn push(&mut self, doc: PackInput<'_>) -> Vec<PackedChunk> {
        let mut out = Vec::new();
        if doc.tokens.is_empty() {
            return out;
        }
        if let (Some(sep), true) = (self.separator, self.report.documents > 0) {
            self.put(&[sep], SpanSource::Separator, &mut out);
            self.report.total_tokens += 1;
        }
        self.put(
            doc.tokens,
            SpanSource::Doc {
                id: doc.id.to_owned(),
                repeat: doc.repeat,
                start: doc.start,
                end: doc.start + doc.tokens.len() as u64,
            },
            &mut out,
        );
        self.report.documents += 1;
        self.report.total_tokens += doc.tokens.len() as u64;
        out
    }

    pub fn finish(self) -> PackReport {
        PackReport {
            dropped_tokens: self.tokens.len() as u64,
            ..self.report
        }
    }
}

/// Pack a whole stream at once.
pub fn pack_chunks<'a, I>(docs: I, chunk_len: u64, separator: Option<u32>) -> Result<(Vec<PackedChunk>, PackReport)>
where
    I: IntoIterator<Item = PackInput<'a>>,
{
    let mut packer = Packer::new(chunk_len, separator)?;
    let mut chunks = Vec::new();
    for doc in docs {
        chunks.extend(packer.push(doc));
    }
    Ok((chunks, packer.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn docs(lens: &[usize]) -> Vec<(String, Vec<u32>)> {
        let mut next = 1000u32;
        lens.iter()
            .enumerate()
            .map(|(i, &n)| {
                let toks = (next..next + n as u32).collect();
                next += n as u32;
                (format!("d{i}"), toks)
            })
            .collect()
    }

    fn inputs(d: &[(String, Vec<u32>)]) -> Vec<PackInput<'_>> {
        d.iter()
            .map(|(id, t)| PackInput {
                id,
                repeat: 0,
                start: 0,
                tokens: t,
            })
            .collect()
    }

    #[test]
    fn exact_division() {
        let d = docs(&[12]);
        let (chunks, r) = pack_chunks(inputs(&d), 6, None).unwrap();
        assert_eq!(chunks.len(), 2);
        assert_eq!(r.dropped_tokens, 0);
        assert_eq!(chunks[1].provenance[0].source, SpanSource::Doc { id: "d0".into(), repeat: 0, start: 6, end: 12 });
    }

    #[test]
    fn separators_between_documents() {
        let d = docs(&[3, 5, 4]);
        let (chunks, r) = pack_chunks(inputs(&d), 6, Some(7)).unwrap();
        assert_eq!((chunks.len(), r.dropped_tokens, r.total_tokens), (2, 2, 14));
        assert_eq!(chunks[0].tokens[3], 7);
        assert_eq!(chunks[0].provenance[1].source, SpanSource::Separator);
    }

    #[test]
    fn empty_input() {
        let (chunks, r) = pack_chunks(Vec::new(), 8, Some(0)).unwrap();
        assert!(chunks.is_empty());
        assert_eq!(r.total_tokens, 0);
        assert!(Packer::new(0, None).is_err());
    }

    #[test]
    fn chunk_json_shape() {
        let d = docs(&[2]);
        let (chunks, _) = pack_chunks(inputs(&d), 2, None).unwrap();
        let json = serde_json::to_string(&chunks[0]).unwrap();
        assert_eq!(
            json,
            r#"{"chunk_index":0,"tokens":[1000,1001],"provenance":[{"chunk_start":0,"chunk_end":2,"kind":"doc","id":"d0","repeat":0,"start":0,"end":2}]}"#
        );
    }

    proptest! {
        #[test]
        fn boundary_agnostic(lens in prop::collection::vec(1usize..50, 1..20), chunk in 1u64..40) {
            // same concatenated stream, different document boundaries
            let d = docs(&lens);
            let whole: Vec<u32> = d.iter().flat_map(|(_, t)| t.clone()).collect();
            let (a, ra) = pack_chunks(inputs(&d), chunk, None).unwrap();
            let one = vec![("all".to_owned(), whole)];
            let (b, rb) = pack_chunks(inputs(&one), chunk, None).unwrap();
            let ta: Vec<&Vec<u32>> = a.iter().map(|c| &c.tokens).collect();
            let tb: Vec<&Vec<u32>> = b.iter().map(|c| &c.tokens).collect();
            prop_assert_eq!(ta, tb);
            prop_assert_eq!(ra.dropped_tokens, rb.dropped_tokens);
        }
    }
}

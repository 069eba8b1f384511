use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use serde_json::{Map, Value};

use crate::corpus_io::{Document, Tokenizer};
use crate::error::{Error, Result};

const KNOWN_FIELDS: [&str; 5] = ["id", "domain", "text", "tokens", "token_count"];

/// Counters collected while reading.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReadStats {
    pub documents: u64,
    pub skipped_empty: u64,
    /// One per unknown field occurrence.
    pub unknown_fields: u64,
}

/// Path, line iterator and current line number of the open file.
type OpenShard = (PathBuf, std::io::Lines<BufReader<Box<dyn Read>>>, usize);

/// Streams documents from line-delimited JSON files in file order, then
/// line order. Files ending in `.gz` are decompressed transparently.
///
/// With no tokenizer (pretokenized input) every record must carry `tokens`.
pub struct CorpusReader<'a> {
    paths: Vec<PathBuf>,
    next_path: usize,
    current: Option<OpenShard>,
    tokenizer: Option<&'a dyn Tokenizer>,
    stats: ReadStats,
    failed: bool,
}

/// Convenience constructor mirroring the pipeline's `read_corpus` step.
pub fn read_corpus<'a, P: AsRef<Path>>(
    paths: &[P],
    tokenizer: Option<&'a dyn Tokenizer>,
) -> CorpusReader<'a> {
    CorpusReader::new(paths, tokenizer)
}

impl<'a> CorpusReader<'a> {
    pub fn new<P: AsRef<Path>>(paths: &[P], tokenizer: Option<&'a dyn Tokenizer>) -> Self {
        CorpusReader {
            paths: paths.iter().map(|p| p.as_ref().to_path_buf()).collect(),
            next_path: 0,
            current: None,
            tokenizer,
            stats: ReadStats::default(),
            failed: false,
        }
    }

    pub fn stats(&self) -> ReadStats {
        self.stats
    }

    fn open(path: &Path) -> Result<BufReader<Box<dyn Read>>> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let inner: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
            Box::new(MultiGzDecoder::new(file))
        } else {
            Box::new(file)
        };
        Ok(BufReader::new(inner))
    }

    fn parse(&mut self, path: &Path, line_no: usize, line: &str) -> Result<Option<Document>> {
        let malformed = |msg: String| Error::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            msg,
        };
        let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(malformed("expected a JSON object".into()));
        };
        self.stats.unknown_fields += obj
            .keys()
            .filter(|k| !KNOWN_FIELDS.contains(&k.as_str()))
            .count() as u64;

        let id = string_field(&obj, "id").map_err(&malformed)?;
        let domain = string_field(&obj, "domain").map_err(&malformed)?;
        if domain.is_empty() {
            return Err(malformed("empty domain".into()));
        }
        let text = match obj.get("text") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(malformed("field `text` must be a string".into())),
        };
        let tokens = match obj.get("tokens") {
            None | Some(Value::Null) => None,
            Some(Value::Array(items)) => Some(
                items
                    .iter()
                    .map(|v| {
                        v.as_u64()
                            .and_then(|t| u32::try_from(t).ok())
                            .ok_or_else(|| malformed(format!("bad token id {v}")))
                    })
                    .collect::<Result<Vec<u32>>>()?,
            ),
            Some(_) => return Err(malformed("field `tokens` must be an array".into())),
        };
        if let (Some(t), Some(count)) = (&tokens, obj.get("token_count")) {
            if count.as_u64() != Some(t.len() as u64) {
                return Err(malformed(format!(
                    "token_count {count} does not match {} tokens",
                    t.len()
                )));
            }
        }

        let tokens = match (tokens, &text) {
            (Some(t), _) => t,
            (None, Some(s)) if s.is_empty() => {
                self.stats.skipped_empty += 1;
                return Ok(None);
            }
            (None, Some(s)) => match self.tokenizer {
                Some(tok) => tok.encode(s),
                None => return Err(malformed("record has no tokens and input is pretokenized".into())),
            },
            (None, None) => return Err(malformed("record has neither `text` nor `tokens`".into())),
        };
        if tokens.is_empty() && text.as_deref().is_none_or(str::is_empty) {
            self.stats.skipped_empty += 1;
            return Ok(None);
        }
        Ok(Some(Document {
            id,
            domain,
            text,
            token_count: tokens.len() as u64,
            tokens: Some(tokens),
        }))
    }
}

fn string_field(obj: &Map<String, Value>, key: &str) -> std::result::Result<String, String> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) if key == "id" => Ok(n.to_string()),
        Some(_) => Err(format!("field `{key}` must be a string")),
        None => Err(format!("missing field `{key}`")),
    }
}

impl Iterator for CorpusReader<'_> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            if self.current.is_none() {
                let path = self.paths.get(self.next_path)?.clone();
                self.next_path += 1;
                match Self::open(&path) {
                    Ok(r) => self.current = Some((path, r.lines(), 0)),
                    Err(e) => {
                        self.failed = true;
                        return Some(Err(e));
                    }
                }
            }
            let (path, lines, line_no) = self.current.as_mut().expect("current file");
            match lines.next() {
                None => self.current = None,
                Some(Err(e)) => {
                    let err = Error::io(path.clone(), e);
                    self.failed = true;
                    return Some(Err(err));
                }
                Some(Ok(line)) => {
                    *line_no += 1;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let (path, n) = (path.clone(), *line_no);
                    match self.parse(&path, n, &line) {
                        Ok(Some(doc)) => {
                            self.stats.documents += 1;
                            return Some(Ok(doc));
                        }
                        Ok(None) => continue,
                        Err(e) => {
                            self.failed = true;
                            return Some(Err(e));
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::{ByteTokenizer, WhitespaceTokenizer};
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn reads_in_file_then_line_order() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a.jsonl",
            "{\"id\":\"1\",\"domain\":\"C4\",\"text\":\"a b c\"}\n\
             {\"id\":\"2\",\"domain\":\"C4\",\"text\":\"d\"}\n\
             {\"id\":\"3\",\"domain\":\"Book\",\"tokens\":[5,6]}\n",
        );
        let tok = WhitespaceTokenizer::new();
        let docs: Vec<Document> = read_corpus(&[a], Some(&tok)).collect::<Result<_>>().unwrap();
        let ids: Vec<&str> = docs.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["1", "2", "3"]);
        assert_eq!(docs[0].token_count, 3);
        assert_eq!(docs[2].tokens.as_deref(), Some(&[5, 6][..]));
    }

    #[test]
    fn malformed_line_names_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "bad.jsonl",
            "{\"id\":\"1\",\"domain\":\"C4\",\"text\":\"x\"}\n{not json\n",
        );
        let mut r = read_corpus(&[a], Some(&ByteTokenizer));
        assert!(r.next().unwrap().is_ok());
        let err = r.next().unwrap().unwrap_err().to_string();
        assert!(err.contains("bad.jsonl:2"), "{err}");
        assert!(r.next().is_none());
    }

    #[test]
    fn unknown_fields_and_empty_text_are_counted() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a.jsonl",
            "{\"id\":\"1\",\"domain\":\"C4\",\"text\":\"\",\"meta\":{}}\n\
             {\"id\":\"2\",\"domain\":\"C4\",\"text\":\"hi\",\"score\":1,\"lang\":\"en\"}\n",
        );
        let mut r = read_corpus(&[a], Some(&ByteTokenizer));
        let docs: Vec<_> = r.by_ref().collect::<Result<Vec<_>>>().unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(
            r.stats(),
            ReadStats {
                documents: 1,
                skipped_empty: 1,
                unknown_fields: 3
            }
        );
    }

    #[test]
    fn pretokenized_requires_tokens() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.jsonl", "{\"id\":\"1\",\"domain\":\"C4\",\"text\":\"hi\"}\n");
        let res: Result<Vec<_>> = read_corpus(&[a], None).collect();
        assert!(res.is_err());
    }

    #[test]
    fn reads_gzip_shards() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.jsonl.gz");
        let mut enc = flate2::write::GzEncoder::new(
            std::fs::File::create(&p).unwrap(),
            flate2::Compression::default(),
        );
        enc.write_all(b"{\"id\":\"g\",\"domain\":\"Github\",\"text\":\"fn main\"}\n")
            .unwrap();
        enc.finish().unwrap();
        let docs: Vec<_> = read_corpus(&[p], Some(&ByteTokenizer))
            .collect::<Result<Vec<_>>>()
            .unwrap();
        assert_eq!(docs[0].token_count, 7);
    }

    #[test]
    fn missing_file_is_io_error() {
        let mut r = read_corpus(&["/nonexistent/x.jsonl"], Some(&ByteTokenizer));
        assert!(matches!(r.next(), Some(Err(Error::Io { .. }))));
    }
}

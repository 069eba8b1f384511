use crate::corpus_io::Document;
use crate::error::{Error, Result};

/// `[start, end)` spans of consecutive `cut_len` chunks covering `len`.
pub(crate) fn chunk_spans(len: u64, cut_len: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..len.div_ceil(cut_len)).map(move |i| (i * cut_len, ((i + 1) * cut_len).min(len)))
}

/// Split every document longer than `cut_len` into consecutive chunks with
/// ids `"{id}#{chunk}"`. Shorter documents pass through unchanged and
/// zero-length documents vanish. Order and domain are preserved.
pub fn cut_documents<I>(docs: I, cut_len: u64) -> Result<Vec<Document>>
where
    I: IntoIterator<Item = Document>,
{
    if cut_len == 0 {
        return Err(Error::invalid("cut_len", "must be positive"));
    }
    let mut out = Vec::new();
    for doc in docs {
        if doc.token_count == 0 {
            continue;
        }
        if doc.token_count <= cut_len {
            out.push(doc);
            continue;
        }
        let tokens = doc.tokens.as_ref().ok_or_else(|| {
            Error::invalid("document", format!("{} has no token ids to cut", doc.id))
        })?;
        for (i, (a, b)) in chunk_spans(doc.token_count, cut_len).enumerate() {
            out.push(Document::from_tokens(
                format!("{}#{i}", doc.id),
                doc.domain.clone(),
                tokens[a as usize..b as usize].to_vec(),
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(n: u32) -> Document {
        Document::from_tokens("d", "Book", (0..n).collect())
    }

    #[test]
    fn ten_thousand_at_4k() {
        let out = cut_documents([doc(10_000)], 4096).unwrap();
        let lens: Vec<u64> = out.iter().map(|d| d.token_count).collect();
        assert_eq!(lens, [4096, 4096, 1808]);
        assert_eq!(out[2].id, "d#2");
        assert!(out.iter().all(|d| d.domain == "Book"));
    }

    #[test]
    fn short_documents_unchanged() {
        assert_eq!(cut_documents([doc(1000)], 4096).unwrap(), vec![doc(1000)]);
        assert_eq!(cut_documents([doc(130_000)], 131_072).unwrap(), vec![doc(130_000)]);
    }

    proptest! {
        #[test]
        fn chunks_concatenate_back(n in 0u32..20_000, cut in 1u64..5_000) {
            let original = doc(n);
            let out = cut_documents([original.clone()], cut).unwrap();
            prop_assert_eq!(out.len() as u64, u64::from(n).div_ceil(cut));
            let joined: Vec<u32> = out.iter().flat_map(|d| d.tokens.clone().unwrap()).collect();
            prop_assert_eq!(joined, original.tokens.unwrap());
            prop_assert!(out.iter().all(|d| d.token_count <= cut));
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::corpus_io::Tokenizer;

/// One domain-tagged record: raw text, token ids, or both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<u32>>,
    pub token_count: u64,
}

impl Document {
    pub fn from_tokens(id: impl Into<String>, domain: impl Into<String>, tokens: Vec<u32>) -> Self {
        Document {
            id: id.into(),
            domain: domain.into(),
            text: None,
            token_count: tokens.len() as u64,
            tokens: Some(tokens),
        }
    }

    pub fn from_text(
        id: impl Into<String>,
        domain: impl Into<String>,
        text: impl Into<String>,
        tokenizer: &dyn Tokenizer,
    ) -> Self {
        let text = text.into();
        let tokens = tokenizer.encode(&text);
        Document {
            id: id.into(),
            domain: domain.into(),
            text: Some(text),
            token_count: tokens.len() as u64,
            tokens: Some(tokens),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain.is_empty() {
            return Err(Error::invalid("document", format!("{}: empty domain", self.id)));
        }
        match (&self.text, &self.tokens) {
            (None, None) => Err(Error::invalid(
                "document",
                format!("{}: neither text nor tokens", self.id),
            )),
            (_, Some(t)) if t.len() as u64 != self.token_count => Err(Error::invalid(
                "document",
                format!(
                    "{}: token_count {} does not match {} tokens",
                    self.id,
                    self.token_count,
                    t.len()
                ),
            )),
            _ => Ok(()),
        }
    }

    /// Token ids, encoding the text on the fly when none are stored.
    pub fn resolve_tokens(&self, tokenizer: Option<&dyn Tokenizer>) -> Option<Vec<u32>> {
        match (&self.tokens, &self.text, tokenizer) {
            (Some(t), _, _) => Some(t.clone()),
            (None, Some(text), Some(tok)) => Some(tok.encode(text)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::WhitespaceTokenizer;

    #[test]
    fn from_text_counts_tokens() {
        let doc = Document::from_text("d0", "C4", "a b c", &WhitespaceTokenizer::new());
        assert_eq!(doc.token_count, 3);
        doc.validate().unwrap();
    }

    #[test]
    fn validate_rejects_bad_documents() {
        let mut doc = Document::from_tokens("x", "Book", vec![1, 2, 3]);
        doc.token_count = 4;
        assert!(doc.validate().is_err());
        let doc = Document::from_tokens("x", "", vec![1]);
        assert!(doc.validate().is_err());
        let doc = Document {
            id: "x".into(),
            domain: "Book".into(),
            text: None,
            tokens: None,
            token_count: 0,
        };
        assert!(doc.validate().is_err());
    }
}

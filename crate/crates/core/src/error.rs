use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}:{line}: malformed record: {msg}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("document {id} has {tokens} tokens, larger than the shard limit {limit}")]
    OversizeDocument { id: String, tokens: u64, limit: u64 },

    #[error("no documents")]
    NoDocuments,

    #[error("domain {0} has no long documents")]
    NoLongDocuments(String),

    #[error("invalid {what}: {msg}")]
    Invalid { what: &'static str, msg: String },

    #[error("missing baseline cell for domain {domain}, band {band}")]
    MissingBaseline { domain: String, band: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid { .. }
                | Error::NoDocuments
                | Error::NoLongDocuments(_)
                | Error::MissingBaseline { .. }
                | Error::OversizeDocument { .. }
                | Error::Malformed { .. }
        )
    }
}

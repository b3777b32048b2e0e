use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where a bad record came from. `line` is 1-based; in-memory records use
/// their position in the input list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub file: Option<PathBuf>,
    pub line: usize,
}

impl Origin {
    pub fn line(line: usize) -> Self {
        Self { file: None, line }
    }

    pub fn in_file(file: impl Into<PathBuf>, line: usize) -> Self {
        Self {
            file: Some(file.into()),
            line,
        }
    }
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.file {
            Some(path) => write!(f, "{}:{}", path.display(), self.line),
            None => write!(f, "record {}", self.line),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node type `{name}`{}", at(.origin))]
    UnknownType { name: String, origin: Option<Origin> },

    #[error("unknown node `{id}`{}", at(.origin))]
    UnknownNode { id: String, origin: Option<Origin> },

    #[error("unknown relation `{name}`{}", at(.origin))]
    UnknownRelation { name: String, origin: Option<Origin> },

    #[error("edge {src} -[{relation}]-> {dst} does not match the relation's endpoint types{}", at(.origin))]
    EndpointTypeMismatch {
        src: String,
        dst: String,
        relation: String,
        origin: Option<Origin>,
    },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("duplicate node `{id}`{}", at(.origin))]
    DuplicateNode { id: String, origin: Option<Origin> },

    #[error("cannot parse meta-path `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("ambiguous relation between `{src}` and `{dst}`; use the long form A-[R]->B")]
    AmbiguousRelation { src: String, dst: String },

    #[error("no relation connects `{src}` to `{dst}`")]
    SchemaMismatch { src: String, dst: String },

    #[error("node type `{0}` has no relations, so no meta-path can start there")]
    NoPathExists(String),

    #[error("node `{node}` has type `{actual}` but the meta-path endpoint type is `{expected}`")]
    TypeMismatch {
        node: String,
        actual: String,
        expected: String,
    },

    #[error("meta-path `{0}` is not symmetric")]
    AsymmetricMetaPath(String),

    #[error("meta-path `{0}` has odd length; tours need a meeting node")]
    OddLengthMetaPath(String),

    #[error("meta-path set is empty")]
    EmptyMetaPathSet,

    #[error("meta-paths in one set must share the endpoint type (`{0}` vs `{1}`)")]
    MixedEndpointTypes(String, String),

    #[error("`{node}` is not a `{relation}` neighbour of `{from}`")]
    NotNeighbor {
        from: String,
        node: String,
        relation: String,
    },

    #[error("content mode `{0}` is not supported by this engine")]
    UnsupportedContentMode(&'static str),

    #[error("walk count must be at least 1")]
    InvalidWalkCount,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("relation weight must be non-negative, got {0}")]
    NegativeValue(f64),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),

    #[error("format error{}: {reason}", at(.origin))]
    Format { reason: String, origin: Option<Origin> },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("test split contains no new links")]
    EmptyTestSet,

    #[error("metric input is empty")]
    EmptyInput,

    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

fn at(origin: &Option<Origin>) -> String {
    match origin {
        Some(o) => format!(" at {o}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(reason: impl Into<String>, origin: Option<Origin>) -> Self {
        Error::Format {
            reason: reason.into(),
            origin,
        }
    }

    pub(crate) fn unknown_node(id: impl Into<String>) -> Self {
        Error::UnknownNode {
            id: id.into(),
            origin: None,
        }
    }

    pub(crate) fn unknown_relation(name: impl Into<String>) -> Self {
        Error::UnknownRelation {
            name: name.into(),
            origin: None,
        }
    }

    /// Attach a record origin to errors that carry one and lack it.
    pub(crate) fn with_origin(mut self, new: Origin) -> Self {
        match &mut self {
            Error::UnknownType { origin, .. }
            | Error::UnknownNode { origin, .. }
            | Error::UnknownRelation { origin, .. }
            | Error::EndpointTypeMismatch { origin, .. }
            | Error::DuplicateNode { origin, .. }
            | Error::Format { origin, .. } => {
                if origin.is_none() {
                    *origin = Some(new);
                }
            }
            _ => {}
        }
        self
    }
}

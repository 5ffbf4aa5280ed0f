use std::path::PathBuf;

use thiserror::Error;

use crate::ModelId;

/// Failures while reading an OFF document.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OffError {
    #[error("bad magic: expected `OFF`, found `{0}`")]
    BadMagic(String),
    #[error("empty document")]
    Empty,
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("counts inconsistent with body: {0}")]
    CountMismatch(String),
    #[error("line {line}: face references vertex {index} but only {vertex_count} vertices exist")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("line {line}: face has {count} vertices, need at least 3")]
    FaceTooSmall { line: usize, count: usize },
    #[error("triangle {0} repeats a vertex index")]
    RepeatedIndex(usize),
    #[error("mesh has no vertices")]
    NoVertices,
    #[error("mesh has no usable triangles")]
    NoTriangles,
}

/// Failures while reading a `.cla` taxonomy or applying a grouping.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaxonomyError {
    #[error("unsupported classification header `{0}` (expected `PSB 1`)")]
    BadMagic(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("count mismatch: {0}")]
    CountMismatch(String),
    #[error("model {0} listed in more than one category")]
    DuplicateModel(ModelId),
    #[error("category `{0}` declared twice")]
    DuplicateCategory(String),
    #[error("grouping references unknown subclass `{0}`")]
    UnknownSubclass(String),
    #[error("subclass `{subclass}` assigned to both `{first}` and `{second}`")]
    SubclassReassigned {
        subclass: String,
        first: String,
        second: String,
    },
    #[error("class `{0}` declared twice in grouping")]
    DuplicateClass(String),
    #[error("class `{0}` has no subclasses")]
    EmptyClass(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Off(#[from] OffError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("mesh {id}: {source}")]
    Mesh { id: String, source: OffError },
    #[error("mesh has zero surface area")]
    ZeroArea,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),
    #[error("no descriptor for model {0}")]
    MissingDescriptor(ModelId),
    #[error("subclass `{0}` has no indexed members")]
    EmptySubclass(String),
    #[error("representative set is empty")]
    NoRepresentatives,
    #[error("unknown model {0}")]
    UnknownModel(ModelId),
    #[error("store: {0}")]
    Store(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

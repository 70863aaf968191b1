use std::fmt;

use thiserror::Error;

/// Kinds of structural problems reported by the validators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticKind {
    EmptyGraph,
    DuplicateId,
    UnknownEndpoint,
    LoopEdge,
    Disconnected,
    InfiniteVertexValence,
    InfiniteVertexGenus,
    InfiniteLengthOnFiniteEdge,
    FiniteLengthOnInfiniteEdge,
    NonPositiveLength,
    // morphism diagnostics
    MapSize,
    UnknownImage,
    DegreeContractionMismatch,
    EndpointMismatch,
    MetricMismatch,
    InfiniteEdgeImage,
    PointDegreesMissing,
    PointDegreesUnexpected,
}

impl DiagnosticKind {
    pub fn as_str(self) -> &'static str {
        use DiagnosticKind::*;
        match self {
            EmptyGraph => "empty graph",
            DuplicateId => "duplicate id",
            UnknownEndpoint => "unknown endpoint",
            LoopEdge => "loop edge",
            Disconnected => "disconnected",
            InfiniteVertexValence => "infinite vertex valence",
            InfiniteVertexGenus => "infinite vertex genus",
            InfiniteLengthOnFiniteEdge => "infinite length on finite edge",
            FiniteLengthOnInfiniteEdge => "finite length on infinite edge",
            NonPositiveLength => "non-positive length",
            MapSize => "map size",
            UnknownImage => "unknown image",
            DegreeContractionMismatch => "degree/contraction mismatch",
            EndpointMismatch => "endpoint mismatch",
            MetricMismatch => "length mismatch",
            InfiniteEdgeImage => "infinite edge image",
            PointDegreesMissing => "degrees required for point target",
            PointDegreesUnexpected => "point degrees given for non-point target",
        }
    }
}

/// One violated invariant, with the id of the offending vertex or edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub id: String,
    pub detail: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, id: impl Into<String>, detail: impl Into<String>) -> Self {
        Diagnostic { kind, id: id.into(), detail: detail.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.kind.as_str(), self.id)?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {}", join(.0))]
    InvalidModel(Vec<Diagnostic>),
    #[error("invalid morphism: {}", join(.0))]
    InvalidMorphism(Vec<Diagnostic>),
    #[error("malformed rational {0:?}")]
    MalformedRational(String),
    #[error("unknown id {0:?}")]
    UnknownId(String),
    #[error("point not Λ-rational: {0}")]
    NotRationalPoint(String),
    #[error("divisor supported at infinite vertex {0}")]
    InfiniteSupport(String),
    #[error("morphism is not harmonic at {0}")]
    NotHarmonic(String),
    #[error("degrees required for point target")]
    PointTargetDegrees,
    #[error("negative ramification (R = {0})")]
    NegativeRamification(i64),
    #[error("wild or ambiguous characteristic {char_p} for degree {degree}")]
    WildCharacteristic { char_p: u64, degree: u32 },
    #[error("morphism is not tame in characteristic {0}")]
    NotTame(u64),
    #[error("morphism is not effective at {vertex} (r = {r})")]
    NotEffective { vertex: String, r: i64 },
    #[error("target is not a tree")]
    TargetNotTree,
    #[error("non-integer length on edge {0}")]
    NonIntegerLength(String),
    #[error("degree {0} exceeds the supported enumeration limit")]
    DegreeTooLarge(u32),
    #[error("ill-defined homomorphism: {0}")]
    IllDefinedHom(String),
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An error located inside a JSON document.
    #[error("{path}: {source}")]
    At { path: String, source: Box<Error> },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(path: impl Into<String>, source: Error) -> Self {
        Error::At { path: path.into(), source: Box::new(source) }
    }

    /// The innermost error, without location wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use crate::scalars::Vertex;

/// Errors raised anywhere in the engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("no zeta value assigned to vertex {0}")]
    MissingVertex(Vertex),
    #[error("vertices {0} and {1} carry the same zeta value")]
    DuplicateZeta(Vertex, Vertex),
    #[error("cannot parse scalar {0:?}")]
    ParseScalar(String),
    #[error("division by zero")]
    DivisionByZero,

    #[error("generator {0:?} is not in the registry")]
    UnknownGenerator(String),
    #[error("duplicate generator {0:?}")]
    DuplicateGenerator(String),
    #[error("a registry holds at most {max} generators, {requested} requested")]
    RegistryTooLarge { max: usize, requested: usize },
    #[error("operands live in different generator registries")]
    RegistryMismatch,
    #[error("exp needs an even element with zero scalar part")]
    ExpDomain,
    #[error("cannot invert differential operator: {0}")]
    OperatorInversion(String),

    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("move site does not match the pattern: {0}")]
    MoveSite(String),
    #[error("invalid lens parameters: {0}")]
    LensParameters(String),
    #[error("triangulation is not orientable or not connected: {0}")]
    Orientation(String),

    #[error("matrix dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not skew-symmetric")]
    NotSkew,

    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inconsistent alpha system: {0}")]
    InconsistentAlpha(String),
    #[error("orderly mapping error: {0}")]
    Orderly(String),

    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Failures reported by mesh construction, discretization and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported polynomial degree {degree} (supported: 0..={max})")]
    UnsupportedDegree { degree: usize, max: usize },

    #[error("no quadrature rule for {what} {requested} (supported: {min}..={max})")]
    UnsupportedQuadrature {
        what: &'static str,
        requested: usize,
        min: usize,
        max: usize,
    },

    #[error("quadrature exactness {available} below the required {required}")]
    InsufficientQuadrature { required: usize, available: usize },

    #[error("degenerate triangle {element}: signed area {area}")]
    DegenerateElement { element: usize, area: f64 },

    #[error("mesh file line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular: no admissible pivot at step {step} (column {column})")]
    SingularMatrix { step: usize, column: usize },

    #[error("local block of element {element} is singular (stabilization parameter too small?)")]
    SingularLocalBlock { element: usize },

    #[error("problem dimension {dimension} exceeds the dense limit {limit}")]
    DimensionGuard { dimension: usize, limit: usize },

    #[error("mesh sizes must be strictly decreasing (level {level})")]
    NonMonotoneMeshSize { level: usize },

    #[error("solution and reference live on different meshes")]
    MeshMismatch,

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

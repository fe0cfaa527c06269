use thiserror::Error;

/// Errors produced by mesh construction, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),

    #[error("unsupported polynomial degree {0}")]
    UnsupportedDegree(usize),

    #[error("singular local system on element {element} (tau = {tau})")]
    SingularLocal { element: usize, tau: f64 },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    Dimension {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("zero diagonal entry at dof {0}")]
    ZeroDiagonal(usize),

    #[error("singular matrix: zero pivot in column {0}")]
    SingularMatrix(usize),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("pole in closed-form expression: {0}")]
    Pole(&'static str),

    #[error("meshes are not nested: {0}")]
    NotNested(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("triangle {triangle} is degenerate or clockwise (signed area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange { what: &'static str, index: usize, len: usize },
    #[error("unsupported quadrature degree {degree} (max {max})")]
    UnsupportedQuadrature { degree: usize, max: usize },
    #[error("field lives in {found:?} but {expected:?} was required")]
    SpaceMismatch { expected: crate::fe::SpaceKind, found: crate::fe::SpaceKind },
    #[error("coefficient vector has length {found}, space needs {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("iterative solve stalled: relative residual {residual:e} after {iterations} iterations (tolerance {tolerance:e})")]
    ToleranceNotMet { residual: f64, iterations: usize, tolerance: f64 },
    #[error("eigensolve failed: {0}")]
    Eigen(String),
    #[error("dense eigenproblem of size {size} exceeds the cap of {cap} pressure unknowns")]
    DimensionCap { size: usize, cap: usize },
    #[error("unknown manufactured solution `{0}`")]
    UnknownSolution(String),
    #[error("malformed mesh file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

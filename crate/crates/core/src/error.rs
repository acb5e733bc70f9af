use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice span mismatch: {0} vs {1}")]
    SpanMismatch(String, String),
    #[error("empty law: {0}")]
    EmptyLaw(String),
    #[error("degenerate law: {0}")]
    DegenerateLaw(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("empty valid interior: {0}")]
    EmptyInterior(String),
    #[error("oscillation assumption violated: {0}")]
    OscillationViolated(String),
    #[error("tolerance {tol} unreachable within max truncation level {max_level}")]
    TolUnreachable { tol: f64, max_level: i64 },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

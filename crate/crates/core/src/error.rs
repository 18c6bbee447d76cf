use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input shape: {0}")]
    Shape(String),
    #[error("validation: {0}")]
    Validation(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("structure: {0}")]
    Structure(String),
    #[error("network file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

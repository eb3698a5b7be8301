use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("point {point} out of range for degree {degree}")]
    PointOutOfRange { point: usize, degree: usize },

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("level {level} out of range (depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("tree shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("group is not transitive")]
    NotTransitive,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("enumeration would exceed the cap of {cap} elements")]
    EnumerationCap { cap: usize },

    #[error("horizon violation: {0}")]
    Horizon(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} rows, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("zero rows")]
    ZeroRows,
    #[error("all-zero counts")]
    ZeroCounts,
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("feature `{0}` is constant")]
    ConstantFeature(String),
    #[error("feature `{name}` has {distinct} distinct values, fewer than {bins} bins")]
    TooFewDistinct { name: String, distinct: usize, bins: usize },
    #[error("feature `{0}` is not continuous")]
    NotContinuous(String),
    #[error("feature `{0}` contains non-finite values")]
    NonFinite(String),
    #[error("expected a binary variable, `{name}` has {categories} categories")]
    NotBinary { name: String, categories: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("every locality has fewer than {min_cell} rows")]
    AllLocalitiesTooSmall { min_cell: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

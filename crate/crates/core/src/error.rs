use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("the lattice needs at least one dimension (d + s >= 1)")]
    ZeroDimension,

    #[error("{what} of size {size} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("coordinate {coord:?} lies outside the box")]
    OutOfRange { coord: Vec<i32> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("path is not consistent: {0}")]
    InconsistentPath(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("invalid match matrix: {0}")]
    InvalidMatrix(String),

    #[error("Ford condition fails: no item in {losers:?} ever beats an item in {winners:?}")]
    FordViolation {
        winners: Vec<usize>,
        losers: Vec<usize>,
    },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    Shape {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed one-hot target: {0:?}")]
    BadTarget(Vec<String>),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("bad IDX magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { found: u32, expected: u32 },

    #[error("truncated file: {0}")]
    Truncated(String),

    #[error("count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn ensure_len(expected: usize, got: usize, context: &'static str) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape {
            expected,
            got,
            context,
        })
    }
}

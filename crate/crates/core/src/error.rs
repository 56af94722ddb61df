use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: index {index} outside {lo}..={hi}")]
    IndexOutOfRange {
        what: &'static str,
        index: i64,
        lo: i64,
        hi: i64,
    },
    #[error("rank mismatch: gl({0}|{1}) against gl({2}|{3})")]
    RankMismatch(usize, usize, usize, usize),
    #[error("{0:?} is not a dominant weight of the admissible shape set")]
    NotInP(Vec<i64>),
    #[error("enumeration exceeded the cap of {0} tableaux")]
    CapExceeded(usize),
    #[error("no value assigned to symbol `{0}`")]
    MissingSymbol(String),
    #[error("pole: denominator magnitude {0:e} is below tolerance")]
    Pole(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("zero is not invertible")]
    NotInvertible,
    #[error("no unique dominant term")]
    NoHighest,
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("operator dimension {0} exceeds cap {1}")]
    DimensionCap(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;

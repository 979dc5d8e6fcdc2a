use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("digest width mismatch: expected {expected} octets, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed encoding: {0}")]
    Malformed(String),
    #[error("unknown base CRL (this_update {0})")]
    UnknownBase(u32),
    #[error("delta refers to base {delta_base} but base {supplied} was supplied")]
    BaseMismatch { delta_base: u32, supplied: u32 },
    #[error("day {day} outside validity window 1..={max}")]
    DayOutOfRange { day: u32, max: u32 },
    #[error("duplicate CA hash in input")]
    DuplicateCa,
    #[error("duplicate serial {0} within one CA")]
    DuplicateSerial(u64),
    #[error("input not sorted: {0}")]
    Unsorted(&'static str),
    #[error("serial {0} already present")]
    AlreadyPresent(u64),
    #[error("serial {0} not present")]
    NotPresent(u64),
    #[error("unknown serial {0}")]
    UnknownSerial(u64),
    #[error("scenario error: {0}")]
    Scenario(String),
}

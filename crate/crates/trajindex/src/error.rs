use crate::traj::TupleId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("timestamp {t} outside trajectory domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },
    #[error("segment index {index} out of range: trajectory has {count} segments")]
    SegmentOutOfRange { index: usize, count: usize },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("trajectory is empty over the requested period")]
    EmptyRestriction,
    #[error("index references tuple {0:?} that is not in the store")]
    UnknownTuple(TupleId),
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

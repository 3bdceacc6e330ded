use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scheduling error: strike at {strike_time}s precedes its {latency}s actuation lead")]
    Scheduling { strike_time: f64, latency: f64 },

    #[error("tempo too fast: beat interval {beat_interval}s does not exceed actuation latency {latency}s")]
    TempoTooFast { beat_interval: f64, latency: f64 },

    #[error("no inverse kinematics solution to select from")]
    NoSolution,

    #[error("target pose at t={time}s is unreachable")]
    Unreachable { time: f64 },

    #[error("degenerate orientation at t={time}s (quaternion norm {norm:e})")]
    DegenerateOrientation { time: f64, norm: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}

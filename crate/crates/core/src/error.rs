use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("row {row}: self-loop event on actor `{actor}`")]
    SelfLoop { row: usize, actor: String },

    #[error("row {row}: negative event time {time}")]
    NegativeTime { row: usize, time: f64 },

    #[error("row {row}: tied timestamp {time} and tie-breaking is disabled")]
    TiedTimestamp { row: usize, time: f64 },

    #[error("event at time {time} lies beyond the horizon {horizon}")]
    BeyondHorizon { time: f64, horizon: f64 },

    #[error("unknown actor `{0}`")]
    UnknownActor(String),

    #[error("covariate file has no row for actors: {}", .0.join(", "))]
    MissingCovariateActors(Vec<String>),

    #[error("duplicate actor row `{0}`")]
    DuplicateActor(String),

    #[error("column `{column}`, row {row}: `{value}` is not numeric")]
    NonNumeric {
        column: String,
        row: usize,
        value: String,
    },

    #[error("unknown covariate `{0}`")]
    UnknownCovariate(String),

    #[error("statistic `{0}` needs a covariate name")]
    MissingCovariateName(&'static str),

    #[error("statistic `{0}` does not take a covariate")]
    UnexpectedCovariateName(&'static str),

    #[error("dyad ({0}, {1}) is not in the risk set")]
    NotInRiskSet(usize, usize),

    #[error("invalid spline basis: {0}")]
    Spline(String),

    #[error("t = {t} is outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    #[error("difference order {order} must be below the number of basis functions {k}")]
    PenaltyOrder { order: usize, k: usize },

    #[error("interval {0} has zero length")]
    ZeroLengthInterval(usize),

    #[error("no events in the component being fit")]
    NoEvents,

    #[error("design is rank deficient in columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("estimates diverge (separation) in columns: {}", .0.join(", "))]
    Separation(Vec<String>),

    #[error("penalized Poisson fit did not converge after {0} iterations")]
    NotConverged(usize),

    #[error("both intensities vanish at event {0}")]
    ZeroIntensity(usize),

    #[error("multiple imputation needs at least 2 draws, got {0}")]
    TooFewDraws(usize),

    #[error("chain aborted: {failures} of {attempts} P-steps failed (last: {last})")]
    ChainFailed {
        failures: usize,
        attempts: usize,
        last: String,
    },

    #[error("total event rate is zero")]
    ZeroTotalRate,

    #[error("generation exceeded {0} events")]
    Runaway(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure stems from the inputs rather than from the numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NoEvents
                | Error::RankDeficient(_)
                | Error::Separation(_)
                | Error::NotConverged(_)
                | Error::ZeroIntensity(_)
                | Error::ChainFailed { .. }
                | Error::ZeroTotalRate
                | Error::Runaway(_)
                | Error::ZeroLengthInterval(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

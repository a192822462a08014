use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("user {user} is associated with BS {bs} over a zero-gain link")]
    ZeroLink { user: usize, bs: usize },

    #[error("user {0} has no base station with positive gain")]
    UnreachableUser(usize),

    #[error("association index {bs} for user {user} is out of range (N = {n_bs})")]
    BsOutOfRange { user: usize, bs: usize, n_bs: usize },

    #[error("one-to-one association needs K = N, got K = {n_users}, N = {n_bs}")]
    NotSquare { n_bs: usize, n_users: usize },

    #[error("no perfect matching avoids forbidden entries")]
    NoPerfectMatching,

    #[error("auction exceeded {rounds} rounds without completing")]
    AuctionRoundCap { rounds: usize },

    #[error("instance too large for exhaustive search: {size} candidates exceeds cap {cap}")]
    TooLarge { size: f64, cap: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("geometry generation failed: {0}")]
    Geometry(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}

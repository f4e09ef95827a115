use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{msg}, frame {frame}")]
    Validation { frame: u64, msg: String },

    #[error("invalid route: {0}")]
    InvalidRoute(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("recall undefined: no ground-truth mass")]
    UndefinedRecall,

    #[error("trajectory length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("track {0} has fewer than two observations")]
    NoSpeed(u64),

    #[error("frame {got} fed after frame {last}")]
    OutOfOrder { last: u64, got: u64 },

    #[error("no frames carry a trajectory pair")]
    NoTrajectories,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("need at least {need} detectors, got {got}")]
    InsufficientDetectors { need: usize, got: usize },

    #[error("metric table: {0}")]
    Table(String),
}

impl Error {
    /// Stable machine-readable code for CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "E_IO",
            Error::Parse { .. } => "E_PARSE",
            Error::Validation { .. } | Error::InvalidRoute(_) => "E_VALIDATION",
            Error::InvalidInput(_) | Error::NonFinite(_) => "E_INPUT",
            Error::UndefinedRecall => "E_UNDEFINED_RECALL",
            Error::LengthMismatch(..) => "E_LENGTH",
            Error::NoSpeed(_) => "E_NO_SPEED",
            Error::OutOfOrder { .. } => "E_SEQUENCE",
            Error::NoTrajectories => "E_NO_TRAJECTORIES",
            Error::Degenerate(_) => "E_DEGENERATE",
            Error::InsufficientDetectors { .. } => "E_INSUFFICIENT_DETECTORS",
            Error::Table(_) => "E_TABLE",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Variant names double as the `kind`
/// field of the CLI's structured error output.
#[derive(Debug, Error)]
pub enum Error {
    #[error("layout error: {0}")]
    Layout(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("invalid measurement channel: {0}")]
    Channel(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("solver did not converge after {iterations} iterations (best bounds [{lower}, {upper}])")]
    Solver {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("resource error: {0}")]
    Resource(String),

    #[error("mode error: {0}")]
    Mode(String),

    #[error("catalyst violation in round {round}: memory changed from {before:?} to {after:?}")]
    CatalystViolation {
        round: usize,
        before: String,
        after: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Layout(_) => "LayoutError",
            Error::Numeric(_) => "NumericError",
            Error::Spec(_) => "SpecError",
            Error::Channel(_) => "ChannelError",
            Error::Config(_) => "ConfigError",
            Error::Solver { .. } => "SolverError",
            Error::Resource(_) => "ResourceError",
            Error::Mode(_) => "ModeError",
            Error::CatalystViolation { .. } => "CatalystViolation",
            Error::Domain(_) => "DomainError",
            Error::Parse { .. } => "ParseError",
            Error::Invariant(_) => "InvariantError",
            Error::Io(_) => "IoError",
        }
    }
}

pub(crate) fn layout_err(msg: impl Into<String>) -> Error {
    Error::Layout(msg.into())
}

pub(crate) fn spec_err(msg: impl Into<String>) -> Error {
    Error::Spec(msg.into())
}

use thiserror::Error;

/// Errors raised by transform evaluation, solving and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the object is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A grid-backed transform was queried outside the interval it covers.
    #[error("argument {s} outside covered interval [{lo}, {hi}]")]
    Range { s: f64, lo: f64, hi: f64 },

    /// A required input (for example the mean of a transform) is missing.
    #[error("contract violated: {0}")]
    Contract(String),

    /// A moment condition of an equation family does not hold.
    #[error("condition violated: {0}")]
    Condition(String),

    /// The requested operation is not available for this object.
    #[error("{module}: unsupported: {what}")]
    Capability { module: &'static str, what: String },

    /// A numerical procedure produced non-finite or diverging values.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Configuration could not be parsed or validated.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capability(module: &'static str, what: impl Into<String>) -> Self {
        Error::Capability {
            module,
            what: what.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The variants map onto three broad classes that the command-line front end
/// turns into exit codes: usage/configuration problems, data problems and
/// numerical failures (see [`Error::class`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate series: {0}")]
    Degenerate(String),
    #[error("non-finite value in series `{series}` at year {year}")]
    NonFinite { series: String, year: i32 },
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("singular design: {0}")]
    SingularDesign(String),
    #[error("degrees of freedom: {observations} observations for {parameters} parameters")]
    DegreesOfFreedom { observations: usize, parameters: usize },
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("no cointegration space: selected rank is zero")]
    NoCointegrationSpace,
}

/// Coarse error class used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Unsupported(_) => ErrorClass::Usage,
            Error::Parse { .. }
            | Error::Io(_)
            | Error::Alignment(_)
            | Error::NonFinite { .. }
            | Error::InsufficientData(_) => ErrorClass::Data,
            Error::Degenerate(_)
            | Error::SingularDesign(_)
            | Error::DegreesOfFreedom { .. }
            | Error::Estimation(_)
            | Error::NoCointegrationSpace => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

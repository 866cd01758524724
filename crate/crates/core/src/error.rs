use thiserror::Error;

/// Errors reported by the workbench.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is out of range (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("negative duration {0}")]
    NegativeDuration(f64),
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("empty bit string")]
    EmptyBits,
    #[error("singular linear system of size {0}")]
    SingularSystem(usize),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("unknown output format `{0}` (expected csv or json)")]
    UnknownFormat(String),
    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
    #[error("root not bracketed on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("non-finite value in column `{0}`")]
    NonFinite(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Returns `Ok(value)` when `ok` holds, an [`Error::OutOfRange`] otherwise.
pub(crate) fn ensure(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<f64> {
    if ok && !value.is_nan() {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            expected,
        })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

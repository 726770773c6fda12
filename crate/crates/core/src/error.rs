use std::fmt;

/// Errors raised across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// One or more invariants of an input were violated. Every violation is
    /// listed, in a deterministic order.
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// A solver strategy was asked to work outside its contract.
    #[error("solver contract: {0}")]
    Contract(String),

    /// The observed signal has zero probability under the prior.
    #[error("impossible signal `{0}`: zero probability under the prior")]
    ImpossibleSignal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl fmt::Display) -> Self {
        Error::Validation(vec![msg.to_string()])
    }

    pub fn contract(msg: impl fmt::Display) -> Self {
        Error::Contract(msg.to_string())
    }

    /// The individual violation messages for a validation error.
    pub fn violations(&self) -> &[String] {
        match self {
            Error::Validation(v) => v,
            _ => &[],
        }
    }
}

/// Accumulates validation messages so callers can report all of them at once.
#[derive(Debug, Default)]
pub(crate) struct Violations(Vec<String>);

impl Violations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, msg: impl fmt::Display) {
        self.0.push(msg.to_string());
    }

    /// Absorbs the messages of a failed result, prefixed with `field`.
    pub fn absorb<T>(&mut self, field: &str, res: Result<T>) -> Option<T> {
        match res {
            Ok(v) => Some(v),
            Err(Error::Validation(msgs)) => {
                for m in msgs {
                    self.0.push(format!("{field}: {m}"));
                }
                None
            }
            Err(e) => {
                self.0.push(format!("{field}: {e}"));
                None
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn finish(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self.0))
        }
    }
}

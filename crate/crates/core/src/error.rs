use std::fmt;

/// Every invariant a value failed, collected rather than stopping at the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub messages: Vec<String>,
}

impl ValidationError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            messages: vec![message.into()],
        }
    }

    pub fn from_messages(messages: Vec<String>) -> std::result::Result<(), Self> {
        if messages.is_empty() {
            Ok(())
        } else {
            Err(Self { messages })
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.messages.join("; "))
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(#[from] ValidationError),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("time step {dt_s:e} s exceeds stability limit {limit_s:e} s (fastest time constant / 10)")]
    Stability { dt_s: f64, limit_s: f64 },

    #[error("incomplete horizon: residual energy {residual:e} of E0 exceeds bound {bound:e}")]
    Accuracy { residual: f64, bound: f64 },

    #[error("at R = {r_ohm} ohm: {source}")]
    SweepPoint {
        r_ohm: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("at T = {t_s} s: {source}")]
    RampPoint {
        t_s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed trace file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation(ValidationError::new(message))
    }

    /// Innermost error, unwrapping sweep-point context.
    pub fn root(&self) -> &Error {
        match self {
            Error::SweepPoint { source, .. } | Error::RampPoint { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

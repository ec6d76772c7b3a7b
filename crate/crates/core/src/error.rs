use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("module is not finite-dimensional over the field: {0}")]
    InfiniteDimensional(String),
    #[error("certification failed at point {point}, degree {degree}, condition {condition}: {detail}")]
    Certification {
        point: String,
        degree: i32,
        condition: String,
        detail: String,
    },
}

impl Error {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn pre(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

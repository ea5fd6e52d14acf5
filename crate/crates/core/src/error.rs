use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("unknown origin `{0}`")]
    UnknownOrigin(String),

    #[error("malformed wire record: {0}")]
    Wire(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

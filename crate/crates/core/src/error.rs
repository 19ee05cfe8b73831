use std::io;

use thiserror::Error;

use crate::math::SupportSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A least-squares system on `support` had (numerically) dependent columns.
    #[error("singular least-squares system at {step} on support {support:?}")]
    Singular {
        step: &'static str,
        support: SupportSet,
    },

    #[error("{subsets} column subsets exceed the enumeration limit of {limit}; use the sampled lower bound instead")]
    TooLarge { subsets: u128, limit: u128 },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Singular { .. } | Error::TooLarge { .. } => 3,
            _ => 2,
        }
    }
}

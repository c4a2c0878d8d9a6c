use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: String, reason: String },

    /// The decision layer produced an action the current state cannot support.
    /// This is a bug, never a modelling outcome; the run is aborted.
    #[error("protocol logic error at slot {slot}: {reason}\n  state: {state}")]
    Protocol {
        slot: u64,
        reason: String,
        state: String,
    },

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Param {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or parameter outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Non-finite value produced while integrating the plant.
    #[error("integration fault at joint {joint}, t = {time} s: {detail}")]
    Integration { joint: usize, time: f64, detail: String },

    /// Non-finite intermediate inside a controller evaluation.
    #[error("controller fault at joint {joint}: {detail}")]
    Controller { joint: usize, detail: String },

    /// Malformed configuration file or override.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

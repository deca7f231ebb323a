use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid precision format: {0}")]
    Format(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("target condition number {target:e} unreachable in this precision (limit {limit:e})")]
    Range { target: f64, limit: f64 },

    #[error("discretization error: {0}")]
    Discretization(String),

    #[error("operator is not SPD: pap = {pap:e} at iteration {iteration}")]
    NotSpd { pap: f64, iteration: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract<S: Into<String>>(ok: bool, msg: impl FnOnce() -> S) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Contract(msg().into()))
    }
}

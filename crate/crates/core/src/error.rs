use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine did not reach its declared tolerance.
    #[error("numerical error: {message} (residual estimate {residual:.3e})")]
    Numerical { message: String, residual: f64 },

    /// The request exceeds what exhaustive enumeration can handle.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A verified relation failed; the message names the offending tuple.
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} = {p} is not a probability in [0, 1]"
        )))
    }
}

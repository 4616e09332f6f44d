use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two computations that must agree did not. Always a bug or a
    /// non-minimal model slipping through.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// The Weierstrass model handed to Tate's algorithm is not minimal.
    #[error("non-minimal model at p = {p}")]
    NonMinimal { p: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

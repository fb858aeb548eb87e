use thiserror::Error;

/// Errors produced by the simulator and the protocol layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The requested register exceeds the configured qubit limit.
    #[error("capacity exceeded: {requested} qubits requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },

    /// A caller supplied an argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A matrix or state failed a structural check (unitarity, PSD, trace, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// Linear-inversion tomography could not produce a channel.
    #[error("reconstruction failed: {0}")]
    Reconstruction(String),

    /// Reconstructed Choi matrix has a negative eigenvalue beyond tolerance.
    #[error("non-physical reconstruction: minimum Choi eigenvalue {min_eigenvalue:e}")]
    NonPhysical { min_eigenvalue: f64 },

    /// Count-based estimation was given no data.
    #[error("empty data: {0}")]
    EmptyData(String),

    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}

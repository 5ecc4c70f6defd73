use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HjError {
    #[error("configuration error: {0}")]
    Config(String),

    /// A nonsmooth Hamiltonian was differentiated at (or numerically at) `|p| = 0`.
    #[error("singular costate at trajectory node {node}: |p| = {norm:e}")]
    SingularPoint { node: usize, norm: f64 },

    #[error("non-finite state at trajectory node {node}")]
    NonFinite { node: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl HjError {
    pub fn config(msg: impl Into<String>) -> Self {
        HjError::Config(msg.into())
    }

    /// Errors after which a fresh random initial guess may succeed.
    pub fn is_resample(&self) -> bool {
        matches!(self, HjError::SingularPoint { .. } | HjError::NonFinite { .. })
    }
}

pub type Result<T, E = HjError> = std::result::Result<T, E>;

use core::fmt;

pub type Result<T> = core::result::Result<T, CoreError>;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Non-finite values or mismatched dimensions in caller input.
    InvalidInput(&'static str),
    /// A point lies outside the manifold bounds of its environment.
    Domain(&'static str),
    /// Rejection sampling exhausted its retry cap.
    UnsatisfiableEnvironment { tries: u32 },
    /// A loss or gradient became non-finite during training.
    NonFinite(&'static str),
    /// Shape mismatch between tensors / parameter containers.
    ShapeMismatch { expected: usize, got: usize },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidInput(what) => write!(f, "invalid input: {what}"),
            CoreError::Domain(what) => write!(f, "domain error: {what}"),
            CoreError::UnsatisfiableEnvironment { tries } => {
                write!(f, "free-space rejection sampling failed after {tries} tries")
            }
            CoreError::NonFinite(what) => write!(f, "non-finite value in {what}"),
            CoreError::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}

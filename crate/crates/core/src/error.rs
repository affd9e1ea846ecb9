use thiserror::Error;

/// Errors produced by encoders, analysis routines and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("all-zero matrix has no stable rank")]
    ZeroMatrix,

    #[error("no closed form available for the {0} embedder")]
    UnsupportedKind(String),

    #[error("degenerate grid spacing: D(0)^2 equals D(d)^2 for spacing {spacing}")]
    DegenerateSpacing { spacing: f64 },

    #[error("query {index} at {coord:?} lies outside the grid on axis {axis}")]
    OutOfDomain { index: usize, axis: usize, coord: Vec<f64> },

    #[error(
        "Gram matrix of axis {axis} is rank deficient (reciprocal condition {rcond:.3e}); \
         use a positive ridge or the pseudo-inverse path"
    )]
    RankDeficient { axis: usize, rcond: f64 },

    #[error("complex encoding would have {len} entries; use the separable path instead")]
    TooLarge { len: usize },

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("unsupported image: {0}")]
    UnsupportedImage(String),

    #[error("malformed tensor file: {0}")]
    TensorFormat(String),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::Divergence { .. }
                | Error::DegenerateSpacing { .. }
                | Error::ZeroMatrix
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

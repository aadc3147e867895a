use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot normalize a vector of norm <= 1e-12")]
    ZeroVector,

    #[error("quaternion is not pure: |w| = {0:e} exceeds 1e-9")]
    NotPure(f64),

    #[error("shape mismatch: {expected:?} vs {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("field too small for spatial differences: {width}x{height}")]
    TooSmall { width: usize, height: usize },

    #[error("equirectangular input must be 2:1, got {width}x{height}")]
    BadAspect { width: usize, height: usize },

    #[error("pixel ({u}, {v}) out of bounds for {width}x{height}")]
    OutOfBounds {
        u: usize,
        v: usize,
        width: usize,
        height: usize,
    },

    #[error("no valid pixels under the mask")]
    EmptyMask,

    #[error("degenerate correspondences: second singular value {sigma2:e} below threshold")]
    DegenerateCorrespondences { sigma2: f64 },

    #[error("objective diverged: {objective:e} exceeds 10x initial {initial:e}")]
    Divergence { objective: f64, initial: f64 },

    #[error("malformed PFM header: {0}")]
    MalformedHeader(String),

    #[error("PFM payload truncated: expected {expected} bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },

    #[error("image is not 8-bit RGB")]
    NotRgb,

    #[error("non-finite or negative value in HDR input")]
    NonFinite,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Shifted-basis positional encoders and the linear models built on them.
//!
//! * [`embedders`]: 1D encoders (shifted Gaussian, rect, tri, impulse, sine,
//!   square, and the LinF / LogF / RFF Fourier ladders).
//! * [`spectral`]: stable rank and distance preservation, measured and in
//!   closed form.
//! * [`encoding`]: simple (concatenated) and complex (Kronecker) encodings,
//!   mode-product evaluation and the sparse blending operator.
//! * [`solvers`]: closed-form and gradient-descent linear fits, plus a small
//!   ReLU MLP.
//! * [`signals`]: grid signals, splits, image and tensor I/O, PSNR.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedders;
pub mod encoding;
pub mod error;
pub mod signals;
pub mod solvers;
pub mod spectral;
pub mod tensor;

pub use embedders::{Boundary, Embedder, EmbedderKind, EmbedderParams, EmbeddingMatrix};
pub use error::{Error, Result};
pub use tensor::Tensor;

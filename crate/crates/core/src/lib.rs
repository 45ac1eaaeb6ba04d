//! Self-supervised temporal representation learning over multiple feature
//! streams of the same video, and unsupervised key-step extraction on top of
//! the learned embeddings.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision for everyday use.

pub mod bmc2;
pub mod datamodel;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod keysteps;
pub mod rng;
pub mod scalar;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Single-precision encoder stack, used for training.
pub type Encoder32 = encoder::EncoderParams<f32>;
/// Double-precision encoder stack, used for gradient checking.
pub type Encoder64 = encoder::EncoderParams<f64>;

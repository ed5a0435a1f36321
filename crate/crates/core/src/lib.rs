//! Differentiable fuzzy-bit relaxations of MD5, SHA1, SHA2-256 and Keccak,
//! and a laboratory for training neural networks to invert them.

pub mod autodiff;
pub mod bits;
pub mod error;
pub mod fuzzy;
pub mod harness;
pub mod hash;
pub mod neural;
pub mod rng;
pub mod scalar;

pub use bits::BitVector;
pub use error::{Error, Result};
pub use fuzzy::{Algebra, FuzVector, OpVariantSet};
pub use scalar::Scalar;

pub type Tape64 = autodiff::Tape<f64>;
pub type Tape32 = autodiff::Tape<f32>;
pub type FuzVector64 = fuzzy::FuzVector<f64>;
pub type FuzVector32 = fuzzy::FuzVector<f32>;
pub type Mlp64 = neural::Mlp<f64>;
pub type Mlp32 = neural::Mlp<f32>;

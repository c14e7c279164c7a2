//! Scalar abstraction and the small numerical toolbox built on it.

mod dd;
pub mod fft;
mod kahan;
pub mod linalg;
pub mod quad;
mod real;
pub mod special;

pub use dd::Dd;
pub use kahan::{KahanSum, KahanSumC};
pub use real::Real;

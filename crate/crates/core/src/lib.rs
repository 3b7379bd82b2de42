//! Global quantization of operators on SU(2) ≅ S³.
//!
//! The crate covers the noncommutative Fourier transform on SU(2), matrix-valued
//! full symbols σ(x, l), the difference calculus Δ₊, Δ₋, Δ₀ acting on the
//! quantum number l, composition and adjoint expansions, and finite-band
//! diagnostics for the symbol classes.
//!
//! Index conventions used everywhere: a representation index l is carried as
//! the doubled integer `two_l`, and the matrix row/column `i` of a
//! (2l+1)×(2l+1) block corresponds to the label m = i − l.

pub mod diagnostics;
pub mod diffops;
pub mod error;
pub mod fourier;
pub mod group;
pub mod halfint;
pub mod linalg;
pub mod quantize;
pub mod random;
pub mod repr;
pub mod serial;
pub mod symbols;

pub use error::{Error, Result};
pub use fourier::BandLimitedFunction;
pub use group::{GroupElement, QuadratureGrid, TaylorBasis};
pub use halfint::HalfInt;
pub use linalg::{CMatrix, Complex};
pub use symbols::Symbol;

//! Finite-window laboratory for the smooth Toeplitz algebra of the quantum disk.
//!
//! Operators are `T(f) + c` with `f` a trigonometric polynomial and `c` a
//! finitely supported matrix, so products, norms and commutators are exact
//! rather than truncation artifacts.

pub mod calculus;
pub mod derivations;
pub mod error;
pub mod khomology;
pub mod linalg;
pub mod mobius;
pub mod norms;
pub mod operators;
pub mod random;
pub mod sequences;
pub mod suite;

pub use error::{QdiskError, Result};
pub use linalg::{CMat, C64};
pub use operators::{label_operator, shift, CompactOp, DiagonalOp, FourierModes, ToeplitzElem};
pub use sequences::{ClNormValue, Reciprocal, Symbol};

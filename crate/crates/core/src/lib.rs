//! Numerical laboratory for optimal L²-extension on polydiscs.
//!
//! The crate computes minimal-norm holomorphic extensions in truncated
//! weighted Bergman spaces, dual norms of the extension functionals under
//! the standard weight deformations, and the jumping numbers and vanishing
//! staircases of model singular weights. The [`verify`] module turns those
//! kernels into reproducible verification runs with pass/fail verdicts.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bergman;
pub mod error;
pub mod functionals;
pub mod linalg;
pub mod monomial;
pub mod multiplier;
pub mod quadrature;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};

pub use num_complex::Complex64;
pub use num_rational::Rational64;

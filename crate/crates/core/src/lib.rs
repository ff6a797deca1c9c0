//! Exact and numeric tools for the arithmetic of a nodal quintic threefold defined by a
//! difference of two generalized Chebyshev polynomials: point counts over finite
//! fields, Frobenius traces and L-factors, an Eichler order in a totally definite
//! quaternion algebra over Q(√5), its theta series and Brandt matrices, and the Hodge
//! data of the resolution.

pub mod arith;
pub mod chebyshev;
pub mod error;
pub mod field;
pub mod linalg;
pub mod poly;
pub mod lfunction;
pub mod pointcount;
pub mod quatorder;
pub mod idealtheta;
pub mod brandt;
pub mod hodge;

pub use error::{CoreError, Result};

/// Rational numbers.
pub type Rat = num_rational::BigRational;
/// Elements of Q(√5).
pub type F = arith::QuadElem;
/// Elements of Z[w].
pub type Zw = arith::QuadInt;
/// Matrices over Q.
pub type RatMatrix = linalg::Matrix<Rat>;
/// Matrices over Q(√5).
pub type FMatrix = linalg::Matrix<F>;
/// Matrices over the Brandt coefficient algebra.
pub type AMatrix = linalg::Matrix<arith::AlgAElem>;

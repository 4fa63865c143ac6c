//! Symbolic engine for eigenfunction-intertwining transformations of
//! second-order linear ODEs, and generators of exactly solvable families.

pub mod dd;
pub mod diffop;
pub mod eid;
pub mod expr;
pub mod families;
pub mod generate;
pub mod quadrature;
pub mod record;
pub mod scalar;
pub mod verify;

pub use dd::DoubleDouble;
pub use expr::{Expr, Symbol};
pub use scalar::{Precision, Scalar};

/// Default floating-point scalar.
pub type Real = f64;
/// Exact rational scalar used for symbolic coefficients.
pub type Rational = num_rational::BigRational;

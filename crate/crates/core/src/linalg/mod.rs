//! Dense complex matrices, Pfaffians, determinants and the small amount of
//! special-function and combinatorial support the averaging code needs.

mod matrix;
mod pfaffian;
mod special;
mod symmetric;

pub use matrix::{ComplexMatrix, RealVector};
pub use pfaffian::{determinant, pfaffian, pfaffian_with_tol, DEFAULT_SKEW_RTOL};
pub(crate) use pfaffian::det_row_major;
pub use special::{beta, binomial, factorial, log_beta, log_gamma};
pub use symmetric::{elementary_symmetric, elementary_symmetric_all};
pub(crate) use symmetric::symmetric_coefficients;

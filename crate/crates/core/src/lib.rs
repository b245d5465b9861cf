//! Numerical machinery for O(N) colour-flavour transformations: Haar
//! averages over the orthogonal group, exact Grassmann-algebra expansion of
//! both sides of the fermionic identity, Monte-Carlo verification of the
//! fermionic, bosonic and SO(N) variants, and the characteristic-polynomial
//! averages they produce for real random matrices.

pub mod cft;
pub mod charpoly;
pub mod error;
pub mod grassmann;
pub mod haar;
pub mod jacobi;
pub mod linalg;
pub mod quadrature;

pub use error::{Error, Result};

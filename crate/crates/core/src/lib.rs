//! Numerical toolkit for the shifted fourth moment of Dirichlet L-functions
//! to a prime modulus, plus the divisor-sum identities that feed its proof.

pub mod arith;
pub mod characters;
pub mod error;
pub mod lfunc;
pub mod divisorlab;
pub mod moments;
pub mod specfun;
pub mod suites;

pub use num_complex::Complex64 as C64;

pub use arith::ShiftTuple;
pub use error::{Error, Result};
pub use specfun::QuadratureSpec;

//! Γ, ψ, ζ, Hurwitz ζ, Bessel functions and contour quadrature.

mod bessel;
mod gamma;
mod quad;
mod zeta;

pub use bessel::{bessel, bessel_k0, bessel_y0, BesselKind};
pub use gamma::{digamma, gamma, lgamma, log_gamma, EULER_GAMMA};
pub use quad::{
    gauss_legendre, integrate_interval, vertical_line_integral, LineKernel, LineValue,
    QuadratureSpec,
};
pub use zeta::{hurwitz_zeta, hurwitz_zeta_err, hurwitz_zeta_regular, zeta, zeta_q};

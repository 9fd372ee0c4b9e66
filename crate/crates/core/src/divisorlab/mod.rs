//! Divisor-sum identities: Estermann's function, Ramanujan expansions,
//! Voronoi summation and the quadratic divisor problem.

mod estermann;
mod qdp;
mod ramanujan;
mod voronoi;

pub use estermann::{
    estermann_fe_residual, estermann_fe_sides, estermann_hurwitz, estermann_residues, estermann_series,
    RationalPoint, SeriesValue,
};
pub use ramanujan::{
    divisor_afe_residual, lemma31_residual, lemma31_sides, lemma53_residual, ramanujan_expansion_residual, varpi,
    DivisorAfeReport, ExpansionReport, Lemma53Report, VarpiKernel,
};
pub use qdp::{
    qdp_bruteforce, qdp_compare, qdp_default_sweep, qdp_mainterm, qdp_mainterm_shifted, QdpInstance, QdpMainTerm,
    QdpRow, Sign, SmoothWindow, SCALE_SLACK,
};
pub use voronoi::{bilinear_kl_sum, voronoi_residual, BesselTransforms, BilinearReport, VoronoiReport};

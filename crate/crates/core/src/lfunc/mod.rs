//! Dirichlet L-values, the completed Λ, and the approximate functional
//! equation kernels G, g, V, Ṽ and X.

mod afe;
mod kernel;
mod lvalue;

pub use afe::{afe_residual, four_l_product, AfeEvaluator, AfeReport};
pub use kernel::{
    g_factor, v_tilde, v_weight, v_weight_on, x_factor, x_factor4, GammaKernelSpec, KernelVariant, VKernel,
};
pub use lvalue::{
    completed_lambda, fe_residual, l_value, l_value_err, root_number, HurwitzTable, LValueCache, LValueMethod,
    LValueRecord,
};

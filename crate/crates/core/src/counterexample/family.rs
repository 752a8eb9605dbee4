//! Norms on `ℝ³` arbitrarily close to the `ℓ₄` norm.
//!
//! For an inner exponent `q ∈ [2, 4]` let `N_q(x) = (|x₁|⁴ + ‖(x₂, x₃)‖_q⁴)^{1/4}`.
//! On the two-dimensional block `‖v‖₄ ≤ ‖v‖_q ≤ 2^{1/q − 1/4}‖v‖₄`, so with
//! `c = 2^{1/q − 1/4}` the scaled norm `‖x‖ = N_q(x)/c` satisfies
//! `‖x‖ ≤ ‖x‖₄ ≤ c‖x‖`. Choosing `c = 1 + ε` gives the required closeness,
//! until `q` reaches 2, where the family stops (a dilation of
//! [`NormModel::default_mixed`]).

use crate::error::{Error, Result};
use crate::norms::{Block, NormModel};

/// Reference exponent of the family.
pub const NEAR_LP_EXPONENT: f64 = 4.0;
/// Smallest inner exponent used; larger `ε` are clamped to it.
const INNER_FLOOR: f64 = 2.0;

/// A smooth, strictly convex norm with `‖x‖ ≤ ‖x‖₄ ≤ (1 + ε)‖x‖` on `ℝ³`.
///
/// `ε = 0` returns `ℓ₄` itself.
pub fn near_lp_family(epsilon: f64) -> Result<NormModel> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    let p = NEAR_LP_EXPONENT;
    if epsilon == 0.0 {
        return NormModel::lp(p, 3);
    }
    let q = (1.0 / (1.0 / p + epsilon.ln_1p() / std::f64::consts::LN_2)).max(INNER_FLOOR);
    let c = 2.0_f64.powf(1.0 / q - 1.0 / p);
    NormModel::mixed_block(
        p,
        vec![Block { size: 1, q }, Block { size: 2, q }],
        1.0 / c,
    )
}

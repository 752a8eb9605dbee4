//! Norm models on finite-coordinate real spaces.
//!
//! A [`NormModel`] evaluates `‖x‖`, its unit supporting functional `φ_y`
//! (the gradient of a smooth norm) and its dual norm. Elements of `ℓ_p`-sums
//! with countably many blocks are stored with finite support in
//! [`FiniteSupportElement`].

mod config;
mod finite_support;
mod model;
mod vector;

pub use config::NormConfig;
pub use finite_support::{
    flatten, norm_eval_blocks, unflatten, BlockIndex, BlockSpace, FiniteSupportElement, SequenceSum,
};
pub use model::{
    finite_difference_gradient, norm_eval, support_functional, Block, EvalPath, NormKind, NormModel,
    Support,
};
pub(crate) use model::lp_norm;
pub use vector::Vector;

/// Default absolute step for [`finite_difference_gradient`].
pub const FD_STEP: f64 = 1e-6;

//! Numerical laboratory for semi-inner products on smooth normed spaces.
//!
//! The crate evaluates the unique (Lumer–Giles) semi-inner product of a smooth
//! finite-coordinate norm, tests Birkhoff orthogonality, computes best
//! approximations and orthogonal decompositions, works with quotient spaces
//! and `ℓ_p`-sums, and builds a non-linear map that preserves the semi-inner
//! product together with replayable certificates for both facts.
//!
//! Module map:
//!
//! - [`norms`]: norm models, supporting functionals, finite-support sums.
//! - [`sip`]: semi-inner product evaluation and the axiom suite.
//! - [`ortho`]: orthogonality, best approximation, complement probes.
//! - [`quotient`]: quotient norms, the quotient SIP and the metric-projection section.
//! - [`counterexample`]: the shift-map construction and its certificates.
//! - [`harness`]: verification suites, reports, replay and the CLI.

pub mod counterexample;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod norms;
pub mod ortho;
pub mod quotient;
pub mod sampling;
pub mod sip;

pub use error::{Error, Result};
pub use norms::{BlockIndex, FiniteSupportElement, NormConfig, NormModel, SequenceSum, Vector};
pub use ortho::{Decomposition, SubspaceBasis};
pub use quotient::{QuotientElement, QuotientSpace};

/// Schema tag carried by every JSON document this crate emits.
pub const SCHEMA: &str = "siplab/1";

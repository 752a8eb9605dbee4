//! Verification suites, report emission and the command line.
//!
//! Every report is a JSON document `{schema, command, header, generator,
//! config, result, checks, passed}`; `checks` lists each judged quantity with
//! its bound, and any failed check makes the command exit with code 2.
//! Reports contain no timestamps, so identical inputs give identical bytes.

mod cli;
pub mod config;
pub mod report;
pub mod suites;
pub mod thm2;

pub use cli::{cli_main, load_certificates};
pub use config::{parse_norm, parse_subspace, parse_vector, Format, RunConfig};
pub use report::{Check, Comparison, Report, HEADER};
pub use suites::{
    finite_dim_sl_probe, hanner_check, hanner_suite, isometry_invariance_check, lp_sl_coordinate_case,
    lp_sl_coordinate_instance, register_quotient_subspace, signed_permutation, FiniteDimReport, HannerReport,
    IsometryReport, SlReport,
};
pub use thm2::{thm2_forward_harness, HSection, LinearMap, NormScramble, ProbeMap, Thm2Options, Thm2Report};

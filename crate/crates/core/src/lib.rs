//! Direction and magnitude of selection bias in the odds ratio for binary
//! exposure-outcome data.
//!
//! The library works with two four-cell objects: the joint law of a binary
//! exposure `E` and binary outcome `D` in the target population
//! ([`TargetJoint`]), and the selection probabilities `P(S=1 | D=d, E=e)`
//! ([`SelectionModel`]). The odds ratio observed after conditioning on
//! selection factors as
//!
//! ```text
//! OR_selected = OR_true * Inter_RR
//! ```
//!
//! where `Inter_RR` is the multiplicative interaction of exposure and outcome
//! on selection. Everything else builds on that identity:
//!
//! - [`measures`] computes the association and interaction measures and the
//!   saturated logistic/linear parametrizations of a selection model.
//! - [`classify`](mod@classify) maps qualitative assumptions (monotonicity signs and an
//!   interaction sign on a chosen scale) to a bound direction for the true
//!   odds ratio.
//! - [`sensitivity`] adjusts an observed odds ratio and its confidence limits
//!   by a known value or range of `Inter_RR`, and renders bound verdicts as
//!   reports.
//! - [`oracle`] verifies the bound rules by randomized and grid sampling,
//!   checks the closed-form identities behind them, searches for
//!   non-necessity witnesses, and simulates finite studies.
//!
//! Cell ordering in all four-value I/O is `(d=1,e=1), (d=1,e=0), (d=0,e=1),
//! (d=0,e=0)`.

pub mod classify;
mod error;
pub mod measures;
pub mod oracle;
pub mod sensitivity;

pub use error::Error;

/// Absolute tolerance for probability comparisons on inputs.
pub const PROB_ABS_TOL: f64 = 1e-12;

/// Relative tolerance for comparisons between derived ratios.
pub const RATIO_REL_TOL: f64 = 1e-10;

pub use classify::{
    classify, classify_numeric, derive_assumptions, stratified_classify, AppliedResult,
    BoundDirection, BoundVerdict, InteractionScale, InteractionSign, MonotoneSign,
    QualitativeAssumptions,
};
pub use measures::{
    decomposition, selected_joint, selected_or, Decomposition, InteractionSummary, LinearParams,
    LogisticParams, SelectionModel, TargetJoint, Variable,
};
pub use oracle::{
    check_linear_identity, check_logistic_identity, find_nonnecessity_witness, sample_models,
    simulate_study, verify_result, Constraint, IdentityCheck, ResultId, SamplerConfig, SamplerMode,
    StudySample, VerificationReport,
};
pub use sensitivity::{
    adjust_interval, adjust_or, bound_report, woolf_ci, AdjustedRange, BoundReport,
    IntervalEstimate, ObservedTable,
};

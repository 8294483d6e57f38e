//! Risk certificates for unbounded, heavy-tailed losses.
//!
//! This crate computes, optimizes, and empirically validates PAC-Bayes
//! generalization bounds when the loss is unbounded and only moment or
//! variance information about its tail is available. The machinery is built
//! around the truncation method: the loss is split at a threshold `n/λ` into
//! a bounded part (handled by fast-rate bounds for bounded losses) and a
//! tail part (handled by the moment assumption), and the threshold is
//! optimized. High-probability, in-expectation, and single-draw regimes are
//! all covered.
//!
//! What lives where:
//!
//! - [`dist`]: finite distributions, relative entropy and χ² divergences,
//!   binary KL and its upper inverse, and the binomial normalization
//!   constant ξ(n) summed exactly in log space.
//! - [`loss`]: analytic loss models (Pareto, log-normal, scaled Bernoulli)
//!   with closed-form tails, tail integrals, moments, and seeded
//!   inverse-CDF samplers.
//! - [`scenario`]: finite synthetic learning problems (discrete data law +
//!   loss table, or quantile-coupled model families) whose population risks
//!   are exactly computable.
//! - [`truncation`]: the loss transforms (clip, tail excess, keep-below,
//!   keep-above, power-corrected) and truncated empirical risks under a
//!   posterior.
//! - [`bounds`]: every bound as a pure function from validated inputs to a
//!   [`bounds::BoundCertificate`], plus the χ²-based baselines used for
//!   comparison sweeps.
//! - [`gibbs`]: Gibbs posteriors over finite hypothesis classes and
//!   deterministic grid + golden-section search over `(c, γ, λ)`.
//! - [`harness`]: Monte-Carlo coverage validation with exact binomial
//!   guards, exact mutual-information enumeration, the change-of-measure
//!   master inequality check, comparison sweeps, rate-slope fits, and CSV
//!   emission.
//! - [`cli`]: the `pacbayes` binary surface (`bound`, `sweep`, `coverage`,
//!   `rate`, `mi`).
//!
//! Everything is deterministic: samplers consume explicit seeded streams,
//! per-trial seeds are derived from a master seed by a counter scheme, and
//! parallel runs aggregate order-independently, so any report is
//! bit-identical for 1 and N workers.

// Negated comparisons like `!(x > 0.0)` are deliberate throughout: they
// reject NaN along with the out-of-domain values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Published rational-approximation constants keep their full printed
// precision.
#![allow(clippy::excessive_precision)]

pub mod bounds;
pub mod cli;
pub mod dist;
pub mod gibbs;
pub mod harness;
pub mod loss;
pub mod math;
pub mod rng;
pub mod scenario;
pub mod truncation;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside an operation's domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A cross-module contract was violated (mismatched supports, wrong
    /// estimator handed to a bound, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Posterior mass on an atom the prior does not cover.
    #[error("absolute continuity failure: atom `{atom}` has mass {mass} but the reference distribution has none")]
    AbsoluteContinuity { atom: String, mass: f64 },
    /// A statistically invalid certificate protocol was requested.
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    /// Exact enumeration was requested on a scenario that is too large.
    #[error("enumeration budget exceeded: {0}")]
    EnumerationBudget(String),
    /// Bad run configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use bounds::{BoundCertificate, ComplexityTerm, KappaParams, LambdaPolicy, TheoremId};
pub use dist::{DiscreteDistribution, DivergenceKind, XiValue};
pub use loss::LossModel;
pub use scenario::{Algorithm, Dataset, Scenario};
pub use truncation::{EmpiricalRisk, LossTransform};

//! Solvers for Bayesian persuasion with a type-reporting step.
//!
//! Before the state of nature is drawn, the sender commits to a *menu* of
//! signaling schemes, one per reportable receiver type; each receiver reports
//! a type, the sender draws action recommendations from the committed scheme,
//! and receivers best-respond to the induced posterior. This crate computes
//! and verifies such menus:
//!
//! - [`single`]: optimal incentive-compatible menus of direct, persuasive
//!   signaling schemes for one receiver with finitely many types, plus the
//!   no-menu baseline over recommendation tuples.
//! - [`multi`]: exact sender strategies for many binary-action receivers
//!   without inter-agent externalities, either by an explicit LP over all
//!   receiver subsets or by delayed column generation driven by a
//!   `max_R f(R) + w(R)` pricing oracle.
//! - [`submodular`]: a (1-1/e)-approximation pipeline for submodular sender
//!   utilities: multilinear extension, continuous greedy over the relaxed
//!   polytope, and q-uniform rounding.
//! - [`independent`]: the aggregate formulation for receivers with
//!   independent type distributions, with per-profile scheme recovery.
//! - [`simulate`]: Monte Carlo simulation of the full reporting protocol and
//!   residual verification of every constraint family.
//!
//! All numeric code is generic over the scalar type via [`Scalar`] (any
//! `num_traits::Float`); the crate-root aliases fix `f64`, which is what the
//! solvers and the CLI use.

pub mod instances;
pub mod single;
pub mod lp;
pub mod multi;
pub mod scalar;
pub mod subset;

pub use scalar::Scalar;
pub use subset::Subset;

/// Default concrete scalar used by the CLI and the test suites.
pub type Real = f64;

pub type StatePrior = instances::StatePrior<Real>;
pub type SingleInstance = instances::SingleReceiverInstance<Real>;
pub type MultiInstance = instances::MultiReceiverInstance<Real>;
pub type SetFunction = instances::SenderSetFunction<Real>;
pub type SignalingMenu = single::SignalingMenu<Real>;
pub type Posterior = single::Posterior<Real>;
pub type MarginalMenus = multi::MarginalMenus<Real>;
pub type JointScheme = multi::JointScheme<Real>;
pub type SenderStrategy = multi::SenderStrategy<Real>;
pub type Lp = lp::LinearProgram<Real>;
pub type LpSolution = lp::LpSolution<Real>;

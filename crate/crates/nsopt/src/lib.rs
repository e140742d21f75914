//! Toolkit for nonsmooth first-order optimization with verifiable
//! stationarity guarantees.
//!
//! The pieces fit together like this:
//!
//! * [`vector`] and [`rng`] supply dense Euclidean vectors and seeded,
//!   stream-split random draws.
//! * [`oracle`] defines the first-order oracle protocol: a query returns a
//!   function value, one subgradient, and (when the instance can afford it) a
//!   description of the whole subdifferential. A [`oracle::QueryLedger`]
//!   counts every call against an optional budget.
//! * [`instances`] is a zoo of hard functions with exact oracles: max-affine
//!   chains, an exact-rational piecewise-linear family on the unit interval,
//!   a scaled-norm separation example, smooth surrogates, and the adversarial
//!   construction used by the [`arena`].
//! * [`minnorm`] finds short vectors in convex hulls: a closed-form two-point
//!   combination and Wolfe's min-norm-point method.
//! * [`algorithms`] implements descent methods that drive the norm of a
//!   convex combination of nearby subgradients below a target: an inner
//!   min-norm loop with deterministic bisection or randomized segment probes,
//!   the normalized outer descent loop, and a projected-subgradient warm start
//!   for convex problems.
//! * [`certifier`] constructs and re-verifies stationarity certificates:
//!   points within distance delta of a center, simplex weights, their
//!   subgradients, and the aggregated vector whose norm is the claim.
//! * [`arena`] plays an uninformative resisting oracle against deterministic
//!   algorithms, then materializes a concrete function consistent with every
//!   reply and checks that no visited point was close to stationary.

pub mod algorithms;
pub mod arena;
pub mod certifier;
pub mod instances;
pub mod minnorm;
pub mod oracle;
pub mod rng;
pub mod vector;

pub use algorithms::{
    gd_then_ingd, ingd, IngdParams, ProbeStrategy, RunResult, RunStatus, RunTrace, TraceEvent,
};
pub use certifier::{certify, verify_certificate, Certificate, CertifyOutcome, CertifyRequest};
pub use oracle::{ActiveSet, BudgetExhausted, Oracle, OracleReply, QueryLedger};
pub use rng::RngStream;
pub use vector::Vector;

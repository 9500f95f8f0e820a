//! Audience-targeting strategy optimization for online advertising.
//!
//! Advertising platforms report, per targeting feature (age band, city
//! level, ...), the share of all audiences in each type (`q`) and the share
//! of actual buyers in each type (`p`). Targeting a set of types multiplies
//! the base conversion rate by the *lift* `Σp / Σq` of the selected types,
//! at the cost of shrinking the covered audience to `Σq`. This crate finds
//! the selection that maximizes lift subject to a minimum coverage floor
//! `L`, exactly:
//!
//! 1. [`stats`] loads, validates, or synthesizes the per-feature statistics.
//! 2. [`prefix`] ranks each feature's types by the ratio `p/q` and builds
//!    the nested family of prefix candidates; within one feature the
//!    shortest prefix covering `L` is optimal.
//! 3. [`mckp`] assembles a log-space multiple-choice knapsack over the
//!    candidate families (one class per feature, capacity `-log L`) and
//!    solves it exactly with an LP-bounded branch-and-bound.
//! 4. [`engine`] runs the end-to-end pipeline, coverage sweeps, profit
//!    metrics, and correlated-feature reports.
//! 5. [`oracle`] holds brute-force enumerators, kept deliberately in plain
//!    probability space, used to audit the solver and the greedy step.

pub mod engine;
pub mod error;
pub mod mckp;
pub mod oracle;
pub mod prefix;
pub mod stats;

pub use error::{Error, Result};

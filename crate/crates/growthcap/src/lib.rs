//! Growth-optimal portfolio analysis and its fading-channel counterpart.
//!
//! The crate is organized around finite-support markets: a market is a
//! discrete distribution over vectors of price relatives, so every
//! expectation is an exact finite sum and every optimality claim can be
//! certified numerically.
//!
//! Modules:
//! - [`market`] — market/channel representations, synthetic generators, CSV
//!   ingestion, and quantile discretization of side information.
//! - [`growth`] — expected-log-growth evaluation and maximization over the
//!   simplex (or the hyperplane, when short selling is allowed), with KKT
//!   certificates and general power utilities.
//! - [`channel`] — fractional Kelly portfolios, their identification with
//!   SIMO ergodic-capacity power allocation, and closed-form water-filling.
//! - [`orders`] — integral stochastic orders (Laplace-transform, ergodic
//!   capacity, growth) between scalar variables and stock-vector processes,
//!   checked over declared parameter grids.
//! - [`sideinfo`] — the financial value of side information, its mutual
//!   information and best-stock-entropy bounds, garbling, and convexity
//!   probes.
//! - [`sitest`] — the KKT-based statistical test for usefulness of side
//!   information with its incomplete-gamma false-alarm bound.
//!
//! # Example
//!
//! ```
//! use growthcap::growth::solve_log_optimal;
//! use growthcap::market::DiscreteMarket;
//!
//! // two-horse race with win probabilities (0.6, 0.4) and fair payoffs:
//! // the growth-optimal portfolio bets proportionally
//! let market = DiscreteMarket::horse_race(&[0.6, 0.4], &[2.0, 2.0]).unwrap();
//! let report = solve_log_optimal(&market, 1e-10, 10_000).unwrap();
//! assert!((report.portfolio.weights()[0] - 0.6).abs() < 1e-8);
//! assert!(report.kkt_gap <= 1e-10);
//! ```

// `!(x > 0.0)` is the NaN-rejecting form of the domain checks; the Lanczos
// coefficients are written at their published precision.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod channel;
pub mod error;
pub mod growth;
pub mod market;
pub mod orders;
pub mod serial;
pub mod sideinfo;
pub mod simplex;
pub mod sitest;
pub mod special;

pub use error::{Error, Result};

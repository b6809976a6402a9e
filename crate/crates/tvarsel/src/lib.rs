//! Forecaster selection for locally stationary autoregressions.
//!
//! Given a univariate series that may be a time-varying AR (tvAR) process,
//! this crate decides, separately for each forecast horizon, between two
//! plug-in linear forecasters:
//!
//! * a **stationary** forecaster, whose Yule-Walker coefficients use the
//!   entire observed past, and
//! * a **locally stationary** forecaster, whose coefficients use only a
//!   trailing window of `N` observations.
//!
//! The decision compares empirical mean squared prediction errors on
//! held-out validation segments and prefers the stationary forecaster
//! unless the windowed one beats it by a user-chosen margin `δ`
//! ([`select::run_procedure`], [`select::run_modified_procedure`]).
//!
//! Around that core sit:
//!
//! * [`tvar`] / [`catalog`] — tvAR specifications, a simulator, and the
//!   named test-bed models used throughout the documentation and the
//!   experiment harness;
//! * [`theory`] — population (model-implied) autocovariances, prediction
//!   errors, the selection margin `f(δ)`, and δ-threshold arithmetic, all
//!   computed from a specification with no data involved;
//! * [`harness`] — Monte Carlo replication of the selection procedure over
//!   a specification catalog, with summary tables;
//! * [`series`] — plain-text series I/O shared by the library and CLI.
//!
//! Most numerical routines are deterministic given their inputs; the
//! simulator is deterministic given a seed, including under the optional
//! `parallel` feature (replications are seeded per index, not per thread).

pub mod catalog;
pub mod error;
pub mod forecast;
pub mod harness;
mod linalg;
pub mod local;
pub mod quad;
pub mod select;
pub mod series;
pub mod theory;
pub mod tvar;

pub use error::{Error, ErrorClass, Result};
pub use forecast::{forecast_ls, forecast_s, ModelClass, MspeResult};
pub use select::{
    run_modified_procedure, run_procedure, HorizonReport, SelectionConfig, SelectionReport,
};
pub use series::Series;
pub use tvar::{simulate_tvar, TvarSpec};

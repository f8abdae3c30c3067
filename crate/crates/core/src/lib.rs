//! Randomization tests for panel data with staggered treatment adoption.
//!
//! The reference distribution of the test comes from a Cox proportional
//! hazards model of adoption times: conditional on the first adoption time
//! and the covariates, the identity of the first adopter follows a softmax
//! law in the covariates at that time. The crate provides
//!
//! * [`panel`] — the panel / adoption-time data model and CSV ingestion,
//! * [`cox`] — partial-likelihood estimation of the hazard coefficients,
//! * [`randtest`] — adopter weights, weighted critical values, p-values and
//!   the (optionally randomized) test decision,
//! * [`stats`] — test-statistic plugins: difference-in-differences,
//!   synthetic control, and robustified variants,
//! * [`simlab`] — data-generating processes and a seeded Monte Carlo driver
//!   that tabulates rejection rates of the uniform / feasible / infeasible
//!   tests.

pub mod cox;
pub mod panel;
pub mod randtest;
pub mod simlab;
pub mod stats;

pub use cox::{fit_cox, CoxFit, CoxOptions};
pub use panel::{AdoptionData, CsvSchema, Panel, TimeIndex};
pub use randtest::{run_test, TestReport, WeightMode, WeightVector};
pub use stats::Statistic;

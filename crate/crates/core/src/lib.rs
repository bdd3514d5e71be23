//! Grid histogram classification with boundary-aware risk analysis.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: cube partitions of `R^d` and cell addressing.
//! - [`synth`]: synthetic distributions on `[-1,1]^d x {-1,+1}` with an
//!   analytic posterior, distance to the decision boundary and known margin
//!   exponents.
//! - [`hist`]: the empirical and infinite-sample histogram rules, an
//!   exhaustive ERM checker and the training-validation cell-width selector.
//! - [`margin`]: near/far cell decomposition, tube volumes and Monte Carlo
//!   estimators of the margin exponents.
//! - [`risk`]: classification loss, empirical risk, exact and Monte Carlo
//!   excess risk, and the risk-split and variance-bound checks.
//! - [`rates`]: rate exponents, theoretical constants, the cell-width
//!   schedule and the rate-experiment runner.
//! - [`cli`]: the `histrule` command-line harness.

// Validation uses `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod hist;
pub mod margin;
mod quad;
pub mod rates;
pub mod risk;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{CellBox, CellIndex, GridSpec};
pub use hist::{HistogramClassifier, SGrid, TvhrFit};
pub use margin::NearFarSplit;
pub use rates::{RateExperimentResult, RateParams, TheoreticalConstants};
pub use risk::RiskReport;
pub use synth::{FamilyKind, Label, LabeledSample, MarginProfile, SyntheticFamily};

//! Pricing engine for noisy releases of trained linear models.
//!
//! The pipeline: train an optimal model ([`models`]), release versions of
//! it with Gaussian noise and measure their expected error ([`mechanism`]),
//! choose arbitrage-free prices for a set of versions ([`revenue`]), and
//! audit and quote from the resulting pricing curves ([`pricing`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covering;
pub mod dataset;
pub mod error;
pub mod isotonic;
pub mod mechanism;
pub mod models;
pub mod pricing;
pub mod revenue;

pub use error::{Error, Result};

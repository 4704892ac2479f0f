//! Optimal taxation when citizens are unsure whether the government is honest.
//!
//! Households see a signal about whether revenue turned into public goods and
//! update their trust. The government picks a labor tax and a broad-base tax
//! knowing that today's revenue shapes tomorrow's trust.

// Range checks are written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dynamic_solver;
pub mod economy;
pub mod error;
pub mod experiments;
pub mod monitoring;
mod search;
pub mod simulator;
pub mod static_solver;

pub use error::{Result, SolverError};

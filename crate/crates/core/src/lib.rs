//! Optimal approximate designs for predicting individual coefficients in
//! random coefficient regression models.
//!
//! The crate evaluates the integrated mean squared error (IMSE) of the best
//! linear unbiased predictors, its minimax limits when some variances go to
//! zero or infinity, solves for optimal design weights, and checks the
//! underlying mean squared error formula by simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blup;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod linalg;
pub mod model;
pub mod simulation;
pub mod solvers;

pub use error::{DesignError, Result};

//! Dissipative quantum-battery simulation.

// `!(x > 0.0)` checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod collective;
pub mod collision;
pub mod control;
pub mod engine;
pub mod error;
pub mod lindblad;
pub mod qcore;

pub use error::{Error, Result};

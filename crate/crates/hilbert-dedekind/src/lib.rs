//! Hilbert modular Dedekind sums over real quadratic fields.

pub mod error;
pub mod field_arith;
pub mod numerics;
pub mod par;
pub mod unit_domain;
pub mod eta_engine;
pub mod dedekind_sums;
pub mod sample;
pub mod quasi_elliptic;
pub mod lfunctions;
pub mod cli;

pub use error::{HdError, Result};

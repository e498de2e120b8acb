//! Conditional mechanical states prepared by a continuous optomechanical
//! measurement and a single photon.

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditional;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod params;
pub mod phase_space;
pub mod plant;
pub mod poly;
pub mod simplecase;
pub mod units;

pub use error::{Error, Result};
pub use exec::Exec;
pub use phase_space::{Axis, GridMin, WignerGrid};

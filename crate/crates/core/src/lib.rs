// `!(x >= 0.0)` is used throughout to reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Simulation and Fisher-information analysis of quantum temperature probes
//! whose relaxation has a long-lived prethermal stage.

pub mod dynamics;
pub mod error;
pub mod metrology;
pub mod numerics;
pub mod probes;
pub mod sampling;

pub use error::{Error, Result};

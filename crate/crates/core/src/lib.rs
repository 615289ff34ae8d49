//! Continual photodetection and heterodyne measurement as autonomous instruments.
//!
//! The core is generic over the real scalar ([`scalar::Real`], implemented for `f32` and
//! `f64`); the aliases below fix it to `f64`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fock;
pub mod heterodyne;
pub mod params;
pub mod photodetector;
pub mod records;
pub mod scalar;

pub use error::{Error, Result};

pub type FockOperator = fock::Operator<f64>;
pub type StateVector = fock::Ket<f64>;
pub type DensityOperator = fock::Density<f64>;
pub type Params = params::InstrumentParams<f64>;

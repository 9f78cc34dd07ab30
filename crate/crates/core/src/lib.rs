//! Matrix-monotonic optimization of MIMO precoders: the structure of the
//! optimal precoder under several power-constraint families, robust designs
//! for imperfect channel knowledge, reference oracles and an experiment
//! harness.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod monotone;
pub mod oracle;
pub mod robust;
pub mod structure;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CMatrix64 = linalg::CMatrix<f64>;
pub type HermitianPsd64 = linalg::HermitianPsd<f64>;
pub type Objective64 = model::Objective<f64>;
pub type ConstraintSet64 = model::ConstraintSet<f64>;
pub type Scenario64 = model::Scenario<f64>;
pub type PrecoderSolution64 = model::PrecoderSolution<f64>;

//! Time-robust minimax risk for exponential-family estimation.
//!
//! The crate simulates three risk functionals of an estimator: the standard
//! fixed-`n` risk, the weakly adversarial risk where Nature picks a stopping
//! time, and the strongly adversarial risk where Nature picks the worst `n`
//! in hindsight. It also provides the finite-time law-of-the-iterated-logarithm
//! test supermartingale used to bound the latter, with its E-values and
//! p-values.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversaries;
pub mod error;
pub mod estimators;
pub mod model;
pub mod numeric;
pub mod risk;
pub mod rng;
pub mod selection;
pub mod supermartingale;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{FamilyKind, FamilySpec, ParamSet, Rate};
pub use trajectory::{Prefix, Trajectory};

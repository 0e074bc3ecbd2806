// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bc;
pub mod deficiency;
pub mod error;
pub mod measure;
pub mod spectral;
pub mod transfer;
pub mod varcert;

pub use error::{Error, Result};

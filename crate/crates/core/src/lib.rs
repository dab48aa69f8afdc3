#![no_std]
// NaN must fail validation, so `!(x > 0.0)` is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod assembly;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kernels;
mod par;
pub mod quad;
pub mod rng;
pub mod sparse;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dichotomy;
pub mod error;
pub mod fmt;
pub mod lyapunov;
pub mod model;
pub mod runner;
pub mod sl2;
pub mod spectra;

pub use error::{LabError, Result};
pub use sl2::Mat2;

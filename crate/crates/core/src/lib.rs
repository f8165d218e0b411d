// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod error;
pub mod geodesic;
pub mod io;
pub mod means;
pub mod mesh;
pub mod metric;
pub mod sampling;
pub mod smoothing;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};

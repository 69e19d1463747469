//! Numerical laboratory for mass-decreasing conformal deformations of
//! spherically symmetric asymptotically hyperbolic manifolds.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod curvature;
pub mod deform;
pub mod error;
pub mod geometry;
pub mod jsonfmt;
pub mod mass;
pub mod numerics;
pub mod yamabe;

pub use error::{Error, Result};

//! Numerical analysis of finite-dimensional quantum channels: minimal output
//! entropy, Holevo capacity, convex closure and conjugate of the output
//! entropy, the two optimal state sets, and tensor-product diagnostics.

pub mod channels;
pub mod cli;
pub mod entropyopt;
pub mod error;
pub(crate) mod nnls;
pub mod optsets;
pub mod product;
pub mod qcore;
pub mod random;
pub mod report;

pub use error::{Error, Result};

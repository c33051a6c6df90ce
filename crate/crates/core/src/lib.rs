//! Weighted orthonormal Jacobi polynomials, their Sonin envelopes, and
//! numerical verification of explicit bounds on
//! `M_k(x) = sqrt((x-d_m)(d_M-x)) (1-x)^alpha (1+x)^beta P_k(x)^2`.

// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod envelope;
pub mod error;
pub mod extrema;
pub mod jacobi;
pub mod lgamma;
pub mod scaled_real;
pub mod verify;

pub use error::{Error, Result};
pub use jacobi::{Params, Window};
pub use scaled_real::ScaledReal;

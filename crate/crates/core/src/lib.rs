//! Exact equivalence decisions and value-set numerics for finite
//! exponential sums `Σ a_j e^{λ_j s}`.

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
pub mod dsl;
pub mod equivalence;
pub mod exactlin;
pub mod exponents;
pub mod json;
pub mod sums;
pub mod valuesets;

// `!(x < y)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bounds;
pub mod cumulated;
pub mod error;
pub mod export;
pub mod integrator;
pub mod search;
pub mod wmodel;

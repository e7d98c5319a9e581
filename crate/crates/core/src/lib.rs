//! Walk-on-half-spaces Monte Carlo for the first passage of isotropic
//! α-stable processes into the slab (−1, 1) × R^{d−1}.
//!
//! `kernels` evaluates the closed-form first-passage laws, `samplers` draws
//! exact crossings, `walk` iterates them until the slab is entered, and
//! `validate` certifies samplers against kernels and kernels against each other.

// negated comparisons are kept on purpose: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod kernels;
pub mod numerics;
pub mod samplers;
pub mod validate;
pub mod walk;

pub use error::{Error, Result};

//! Statistical and quadrature validation of kernels, samplers and walks.

pub mod gof;
pub mod hist;
pub mod oracles;
pub mod suites;

pub use gof::{
    chi_square_counts, ks_test, two_of_three, two_sample_ks, weighted_chi_square, ChiSquareOutcome, KsOutcome,
};
pub use hist::Histogram2D;
pub use oracles::QuadCheck;
pub use suites::{run_suite, run_suite_named, Check, Suite, SuiteOptions, ValidationReport};

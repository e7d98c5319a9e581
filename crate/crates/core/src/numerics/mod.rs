//! Special functions, quadrature and tabulated inverse CDFs.

pub mod constants;
pub mod inverse_cdf;
pub mod quad;
pub mod special;

pub use constants::{stable_constants, StableConstants};
pub use inverse_cdf::{build_inverse_cdf, TabulatedCdf};
pub use quad::{adaptive_quad, QuadResult, QuadSpec};
pub use special::{gamma_fn, incomplete_j};

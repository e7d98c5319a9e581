//! Adaptive quadrature with declared endpoint singularities.
//!
//! Integrates a few integrands with algebraic endpoint behaviour, then checks
//! that the overshoot kernel carries unit mass.
//!
//! ```bash
//! cargo run --example quadrature
//! ```

use wohs::kernels::StableParams;
use wohs::numerics::{adaptive_quad, incomplete_j, QuadSpec};
use wohs::validate::oracles::overshoot_mass;

fn main() -> wohs::Result<()> {
    let sqrt = adaptive_quad(|u| u.powf(-0.5), &QuadSpec::new(0.0, 1.0).singularities(-0.5, 0.0))?;
    println!("int_0^1 u^-1/2 du = {:.15} (+- {:.1e}), exact 2", sqrt.value, sqrt.abs_error);

    let log = adaptive_quad(f64::ln, &QuadSpec::new(0.0, 1.0).singularities(-0.01, 0.0))?;
    println!("int_0^1 ln u du   = {:.15} (+- {:.1e}), exact -1", log.value, log.abs_error);

    let tail = adaptive_quad(
        |u| 1.0 / (1.0 + u * u),
        &QuadSpec::new(f64::NEG_INFINITY, f64::INFINITY).singularities(-2.0, -2.0),
    )?;
    println!("int_R du/(1+u^2)  = {:.15}, exact pi = {:.15}", tail.value, std::f64::consts::PI);

    println!("J(1; alpha=1, d=2) = {:.12}, exact pi/2", incomplete_j(1.0, 1.0, 2)?);

    for alpha in [0.5, 1.0, 1.5] {
        let q = overshoot_mass(&StableParams::new(alpha, 2)?)?;
        println!("overshoot mass alpha={alpha}: {:.14} (relative bound {:.1e})", q.value, q.rel_bound());
    }
    Ok(())
}

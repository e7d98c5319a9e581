//! Closed-form first-passage kernels of a stable process at a barrier.
//!
//! Evaluates each kernel at a hand-checkable point for α = 1, d = 2 and
//! prints the constants they are built from.
//!
//! ```bash
//! cargo run --example kernels
//! ```

use wohs::kernels::*;

fn main() -> wohs::Result<()> {
    let p = StableParams::new(1.0, 2)?;
    let k = p.constants();
    println!("constants (alpha=1, d=2): C={:.7} A={:.7} B={:.7} E={:.7} K={:.7}", k.c, k.a, k.b, k.e, k.k);

    let at = |x: f64| Point::new(x, vec![0.0]);
    let barrier = Barrier::down(0.0);
    let rows = [
        ("closest reach     x=(1,0) y=(0.5,0)", pcr_density_at(&at(1.0), &at(0.5), &barrier, &p)?),
        ("overshoot         x=(1,0) z=(-1,0)", overshoot_density(&at(1.0), &at(-1.0), &barrier, &p)?),
        (
            "triple            x=(2,0) w=(1,0) y=(2,0) z=(-1,0)",
            triple_density(&at(2.0), &at(1.0), &at(2.0), &at(-1.0), &barrier, &p)?,
        ),
        ("under/overshoot   x=(2,0) y=(1,0) z=(-1,0)", double_density(&at(2.0), &at(1.0), &at(-1.0), &barrier, &p)?),
        ("Green function    x=(2,0) y=(1,0)", green_halfspace(&at(2.0), &at(1.0), &barrier, &p)?),
        ("jump density      |v|=1", jump_density(&[1.0, 0.0], &p)?),
        ("ascending ladder  x=(0,0) z=(1,0)", ascending_ladder_potential(&at(0.0), &at(1.0), &p)?),
        ("ball hitting      x=(2,0) y=(0,0) unit ball", ball_hitting_density(&at(2.0), &at(0.0), &at(0.0), 1.0, &p)?),
    ];
    for (label, v) in rows {
        println!("{label:<52} {v:.7e}");
    }

    // the conditioned overshoot differs from the plain one by the factor |y1/x1|^(alpha-1)
    let q = StableParams::new(0.5, 2)?;
    let (x, y) = (at(2.0), Point::new(-3.0, vec![0.5]));
    let plain = overshoot_density(&x, &y, &Face::Plus.barrier(), &q)?;
    let cond = overshoot_density_conditioned(&x, &y, Face::Plus, &q)?;
    println!("conditioned/plain at alpha=0.5: {:.12} (expected {:.12})", cond / plain, (3.0f64 / 2.0).powf(-0.5));
    Ok(())
}

//! Exact overshoot samplers checked against their laws.
//!
//! Draws first-coordinate overshoots under the plain and the conditioned
//! measure and runs Kolmogorov–Smirnov tests against the exact CDFs, then
//! draws full landing points on a counter-based stream.
//!
//! ```bash
//! cargo run --release --example samplers
//! ```

use statrs::distribution::{Beta, ContinuousCDF};
use wohs::kernels::{Barrier, Face, Point, StableParams};
use wohs::samplers::{overshoot_point, ConditionedMarginal, ConditionedOvershoot, OvershootSampler, RngStream};
use wohs::validate::ks_test;

fn main() -> wohs::Result<()> {
    let n = 100_000;
    let x1 = 2.0;
    let barrier = Barrier::down(1.0);
    for alpha in [0.5, 1.0, 1.5] {
        let sampler = OvershootSampler::new(alpha)?;
        let mut rng = RngStream::new(7, 0);
        // U = (1 - y)/(x - y) follows Beta(1 - alpha/2, alpha/2)
        let u: Vec<f64> = (0..n)
            .map(|_| sampler.sample(x1, &barrier, rng.first()).map(|y| (1.0 - y) / (x1 - y)))
            .collect::<wohs::Result<_>>()?;
        let law = Beta::new(1.0 - alpha / 2.0, alpha / 2.0).expect("valid shapes");
        let ks = ks_test(&u, |v| law.cdf(v))?;
        println!("plain alpha={alpha}: D={:.5} critical={:.5} pass={}", ks.statistic, ks.critical, ks.pass);
    }

    let alpha = 0.6;
    let cond = ConditionedOvershoot::new(alpha)?;
    let exact = ConditionedMarginal::new(x1, Face::Plus, alpha)?;
    let mut rng = RngStream::new(7, 1);
    let y: Vec<f64> = (0..n).map(|_| cond.sample(x1, Face::Plus, rng.first())).collect::<wohs::Result<_>>()?;
    let ks = ks_test(&y, |v| exact.cdf(v))?;
    println!("conditioned alpha={alpha}: D={:.5} critical={:.5} pass={}", ks.statistic, ks.critical, ks.pass);

    let p = StableParams::new(1.5, 3)?;
    let start = Point::on_axis(2.0, 3);
    for id in 0..3 {
        let y = overshoot_point(&start, &barrier, &p, &mut RngStream::new(7, id))?;
        println!("landing point on stream {id}: {:?}", y.coords());
    }
    Ok(())
}

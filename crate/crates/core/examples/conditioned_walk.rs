//! Importance-weighted walks for alpha < 1.
//!
//! Under the plain law a walk with alpha < 1 may never enter the slab. The
//! conditioned walk always enters and its weights estimate the hitting
//! probability; the plain walk with a crossing cap gives a comparison.
//!
//! ```bash
//! cargo run --release --example conditioned_walk
//! ```

use wohs::kernels::{Point, StableParams};
use wohs::walk::{batch_walk, hitting_probability_estimate, Measure, Status, WalkConfig};

fn main() -> wohs::Result<()> {
    let n = 20_000;
    for (alpha, start) in [(0.5, 2.0), (0.5, 5.0), (0.8, 3.0)] {
        let params = StableParams::new(alpha, 2)?;
        let cfg = WalkConfig::new(params, Point::on_axis(start, 2)).measure(Measure::Conditioned);
        let cond = batch_walk(&cfg, n, 4, 3)?;
        let est = hitting_probability_estimate(&cond.results)?;

        let plain_cfg = WalkConfig::new(params, Point::on_axis(start, 2)).max_crossings(1000);
        let plain = batch_walk(&plain_cfg, n, 4, 4)?;
        let entered = plain.results.iter().filter(|r| r.status == Status::Entered).count() as f64 / n as f64;
        println!(
            "alpha={alpha} start={start}: weighted estimate {:.4} +- {:.4} (trimmed {:.4}), plain entered fraction {entered:.4}",
            est.mean, est.std_error, est.trimmed_mean
        );
    }
    Ok(())
}

//! Walk on half-spaces into the slab (-1,1) x R^{d-1}.
//!
//! Runs a batch of plain walks in both transverse modes, summarises the
//! entry points, and shows that the batch is the same for any worker count.
//!
//! ```bash
//! cargo run --release --example walk
//! ```

use wohs::kernels::{Point, StableParams};
use wohs::walk::{batch_walk, Mode, WalkConfig};

fn main() -> wohs::Result<()> {
    let params = StableParams::new(1.5, 2)?;
    let n = 20_000;
    for mode in [Mode::Collapsed, Mode::FullTrace] {
        let cfg = WalkConfig::new(params, Point::on_axis(2.0, 2)).mode(mode);
        let batch = batch_walk(&cfg, n, 4, 11)?;
        let entered: Vec<&Point> = batch.results.iter().filter_map(|r| r.final_point.as_ref()).collect();
        let mean_k = batch.results.iter().map(|r| r.n_crossings as f64).sum::<f64>() / n as f64;
        let mut t: Vec<f64> = entered.iter().map(|p| p.transverse[0]).collect();
        t.sort_by(f64::total_cmp);
        let iqr = t[3 * t.len() / 4] - t[t.len() / 4];
        println!("{mode:?}: {} of {n} entered, mean crossings {mean_k:.3}, transverse IQR {iqr:.3}", entered.len());
    }

    let cfg = WalkConfig::new(params, Point::on_axis(1.2, 2)).record_trace(true).mode(Mode::FullTrace);
    let one = batch_walk(&cfg, 1, 1, 11)?.results.remove(0);
    for e in one.trace.iter().flatten() {
        println!("crossing {} of face {:?}: x1={:.4} transverse={:.4?}", e.k, e.face, e.x1, e.transverse);
    }

    let cfg = WalkConfig::new(params, Point::on_axis(3.0, 2));
    let a = batch_walk(&cfg, 1000, 1, 5)?.results;
    let b = batch_walk(&cfg, 1000, 8, 5)?.results;
    println!("1 worker and 8 workers agree: {}", a == b);
    Ok(())
}

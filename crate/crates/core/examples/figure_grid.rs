//! Joint entry-point histograms for a grid of (alpha, start) pairs.
//!
//! For alpha in {0.8, 1.5} and first start coordinate in {1.2, 3}, runs walks
//! (conditioned and weighted when alpha < 1), writes the walk CSV and the 2D
//! histogram with its marginals into a directory, and prints the transverse
//! spread of each panel.
//!
//! ```bash
//! cargo run --release --example figure_grid -- /tmp/figure 100000
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use wohs::io::write_walk_csv;
use wohs::kernels::StableParams;
use wohs::validate::suites::{figure_config, transverse_iqr};
use wohs::validate::Histogram2D;
use wohs::walk::batch_walk;

fn main() -> wohs::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "figure".into()));
    let n: usize = args.next().map_or(Ok(20_000), |s| s.parse()).map_err(|e| wohs::Error::Usage(format!("{e}")))?;
    std::fs::create_dir_all(&dir)?;
    let workers = std::thread::available_parallelism().map_or(1, |v| v.get());
    for alpha in [0.8, 1.5] {
        for start in [1.2, 3.0] {
            let cfg = figure_config(StableParams::new(alpha, 2)?, start);
            let results = batch_walk(&cfg, n, workers, 2024)?.results;
            let tag = format!("alpha{alpha}_x{start}");
            write_walk_csv(&results, 2, BufWriter::new(File::create(dir.join(format!("walk_{tag}.csv")))?))?;

            let mut h = Histogram2D::new((-1.0, 1.0), (-8.0, 8.0), 60, 60)?;
            for r in &results {
                if let Some(p) = &r.final_point {
                    h.add_weighted(p.first, p.transverse[0], r.weight);
                }
            }
            h.write_csv(BufWriter::new(File::create(dir.join(format!("hist_{tag}.csv")))?))?;
            h.write_marginal_csv(0, BufWriter::new(File::create(dir.join(format!("hist_{tag}_mx.csv")))?))?;
            h.write_marginal_csv(1, BufWriter::new(File::create(dir.join(format!("hist_{tag}_my.csv")))?))?;
            let (iqr, se) = transverse_iqr(&results)?;
            println!("{tag}: transverse IQR {iqr:.3} +- {se:.3}, {} clipped of {}", h.clipped(), h.total());
        }
    }
    println!("wrote {}", dir.display());
    Ok(())
}

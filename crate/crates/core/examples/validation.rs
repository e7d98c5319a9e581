//! Validation suites: quadrature oracles and statistical checks.
//!
//! Runs the fast deterministic suites on their default parameter sets and
//! prints one line per check; pass a suite name to run another one.
//!
//! ```bash
//! cargo run --release --example validation
//! cargo run --release --example validation -- mode-equivalence
//! ```

use wohs::validate::{run_suite, Suite, SuiteOptions};

fn main() -> wohs::Result<()> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let suites: Vec<Suite> = if names.is_empty() {
        vec![Suite::Normalization, Suite::Factorization, Suite::FlatEarth]
    } else {
        names.iter().map(|s| s.parse()).collect::<wohs::Result<_>>()?
    };
    let opts = SuiteOptions { n: 20_000, ..SuiteOptions::default() };
    for suite in suites {
        let report = run_suite(suite, &opts)?;
        println!("{suite}: {}", if report.pass { "pass" } else { "FAIL" });
        for c in &report.checks {
            println!(
                "  {:<28} alpha={:<4} d={} {:.3e} {} {:.3e} {}",
                c.name,
                c.alpha,
                c.dim,
                c.statistic,
                serde_json::to_value(c.rule)?.as_str().unwrap_or("?"),
                c.threshold,
                if c.pass { "ok" } else { "FAIL" }
            );
        }
    }
    Ok(())
}

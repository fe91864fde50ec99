//! Memory and per-window computation of each classifier relative to
//! logistic regression, at the default parameters and with a larger
//! training set.
//!
//! ```text
//! cargo run --example cost_report
//! ```

use seizure::costmodel::{relative_report, CostParams};

fn main() -> seizure::Result<()> {
    let defaults = CostParams::default();
    println!("{}", relative_report(&defaults)?.to_text());

    // KNN memory grows linearly with the number of stored windows.
    for t in [1_000.0, 10_000.0, 100_000.0] {
        let report = relative_report(&CostParams { t, ..defaults })?;
        let knn = report.row("KNN").unwrap();
        println!(
            "T = {t:>7}: KNN needs {:>12} bits ({:.0}x LR)",
            knn.memory_bits,
            knn.memory_ratio.unwrap()
        );
    }
    Ok(())
}

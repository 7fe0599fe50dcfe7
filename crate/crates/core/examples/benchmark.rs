//! Run a reduced benchmark grid and print the markdown report.
//!
//! ```bash
//! cargo run --release --example benchmark
//! ```

use mojette::bench::{emit_report, run_suite, BenchScenario, Format, Implementation, Operation};

fn main() -> mojette::Result<()> {
    let mut scenarios = Vec::new();
    for implementation in [Implementation::Mojette, Implementation::Rs] {
        scenarios.push(BenchScenario::new(implementation, Operation::Encode, 6, 4, 4096).with_repetitions(31, 5));
        for erasures in 0..=2 {
            scenarios.push(
                BenchScenario::new(implementation, Operation::Decode, 6, 4, 4096)
                    .with_erasures(erasures)
                    .with_repetitions(31, 5),
            );
        }
    }
    let reports = run_suite(&scenarios)?;
    print!("{}", String::from_utf8_lossy(&emit_report(&reports, Format::Markdown)?));
    Ok(())
}

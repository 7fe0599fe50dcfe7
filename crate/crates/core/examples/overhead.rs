//! Storage overhead against block size, and bins no decoder ever reads.
//!
//! ```bash
//! cargo run --example overhead
//! ```

use mojette::{storage_overhead, unused_bins, CodeParams};

fn main() -> mojette::Result<()> {
    for (n, k) in [(6, 4), (12, 8)] {
        let params = CodeParams::new(n, k, 16)?;
        println!("({n},{k}), MDS ratio {:.4}", n as f64 / k as f64);
        for cols in [8, 32, 64, 256, 4096] {
            let r = storage_overhead(&params, cols);
            println!(
                "  P = {cols:5}: {r} = {:.4}",
                *r.numer() as f64 / *r.denom() as f64
            );
        }
    }

    let params = CodeParams::new(6, 4, 16)?;
    let cols = 8;
    let unused = unused_bins(&params, cols)?;
    println!("(6,4) at P = {cols}, bins never read by any 4-subset schedule:");
    for (dir, bins) in params.directions().iter().zip(&unused) {
        println!("  {dir}: {bins:?}");
    }
    Ok(())
}

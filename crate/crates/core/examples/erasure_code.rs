//! Encode a block as n projections and recover it from every k-subset.
//!
//! ```bash
//! cargo run --example erasure_code
//! ```

use itertools::Itertools;
use mojette::{decode_block, encode_block, CodeParams};

fn main() -> mojette::Result<()> {
    let params = CodeParams::new(6, 4, 16)?;
    let data: Vec<u8> = (0..10_000u32).map(|i| (i ^ (i >> 5)) as u8).collect();
    let block = encode_block(&data, &params)?;

    println!("{} bytes -> P = {} columns, k = {} rows", data.len(), block.cols, params.k());
    for (i, proj) in block.projections.iter().enumerate() {
        println!("  projection {i}: {} {:3} bins", proj.dir(), proj.len());
    }

    let mut patterns = 0;
    for lost in (0..params.n()).combinations(params.n() - params.k()) {
        let kept: Vec<_> = block
            .projections
            .iter()
            .enumerate()
            .filter(|(i, _)| !lost.contains(i))
            .map(|(_, p)| p.clone())
            .collect();
        assert_eq!(decode_block(&kept, &params, data.len())?, data);
        patterns += 1;
    }
    println!("recovered from all {patterns} patterns of {} erasures", params.n() - params.k());

    let err = decode_block(&block.projections[..3], &params, data.len()).unwrap_err();
    println!("with 3 projections: {err}");
    Ok(())
}

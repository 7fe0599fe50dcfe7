//! Precompute a reconstruction schedule once and replay it on many blocks.
//!
//! ```bash
//! cargo run --release --example scheduled_decode
//! ```

use std::time::Instant;

use mojette::{build_schedule, forward, inverse_iterative, inverse_scheduled, Direction, Grid, SymbolWidth};
use rand::{rngs::StdRng, RngCore, SeedableRng};

fn main() -> mojette::Result<()> {
    let (cols, rows) = (64, 4);
    let width = SymbolWidth::DEFAULT;
    let dirs: Vec<Direction> = [1, -1, 2, -2].into_iter().map(Direction::unit).collect();

    let schedule = build_schedule(&dirs, cols, rows)?;
    println!(
        "schedule: {} steps, {} pixel XORs (updating every crossing bin would take {})",
        schedule.steps().len(),
        schedule.xor_count(),
        schedule.steps().len() * (dirs.len() - 1)
    );
    for step in &schedule.steps()[..5] {
        println!("  proj {} bin {:4} -> pixel ({}, {})", step.proj_index, step.bin_index, step.col, step.row);
    }

    let mut rng = StdRng::seed_from_u64(7);
    let blocks = 2000;
    let grids: Vec<Grid> = (0..blocks)
        .map(|_| {
            let mut cells = vec![0u8; cols * rows * width.bytes()];
            rng.fill_bytes(&mut cells);
            Grid::from_bytes(cols, rows, width, cells)
        })
        .collect::<Result<_, _>>()?;
    let encoded: Vec<Vec<_>> = grids.iter().map(|g| dirs.iter().map(|&d| forward(g, d)).collect()).collect();

    let start = Instant::now();
    for (projs, grid) in encoded.iter().zip(&grids) {
        assert_eq!(&inverse_iterative(projs, cols, rows)?, grid);
    }
    let iterative = start.elapsed();

    let start = Instant::now();
    for (projs, grid) in encoded.iter().zip(&grids) {
        assert_eq!(&inverse_scheduled(projs, &schedule)?, grid);
    }
    let scheduled = start.elapsed();

    println!("{blocks} blocks: iterative {iterative:?}, scheduled {scheduled:?}");
    Ok(())
}

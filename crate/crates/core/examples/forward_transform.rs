//! Project a small grid along a few directions and print the bins.
//!
//! ```bash
//! cargo run --example forward_transform
//! ```

use mojette::{bin_count, forward_with_stats, Direction, Grid, SymbolWidth};

fn main() -> mojette::Result<()> {
    let (cols, rows) = (4, 3);
    let width = SymbolWidth::new(1)?;
    let cells: Vec<u8> = (1..=(cols * rows) as u8).collect();
    let grid = Grid::from_bytes(cols, rows, width, cells)?;

    for row in 0..rows {
        let line: Vec<String> = (0..cols).map(|c| format!("{:3}", grid.cell(c, row)[0])).collect();
        println!("row {row}: {}", line.join(""));
    }

    for (p, q) in [(0, 1), (1, 1), (-1, 1), (2, 1), (1, 2)] {
        let dir = Direction::new(p, q)?;
        let (proj, stats) = forward_with_stats(&grid, dir);
        assert_eq!(proj.len(), bin_count(dir, cols, rows));
        let bins: Vec<String> = proj.indices().map(|b| format!("{b}:{:#04x}", proj.bin(b).unwrap()[0])).collect();
        println!(
            "{dir}: {} bins, {} copies, {} xors\n    {}",
            proj.len(),
            stats.copies,
            stats.xors,
            bins.join(" ")
        );
    }
    Ok(())
}
